//! Batch front door: config ingestion, subcommands, deterministic seeding,
//! machine-readable outputs.
//!
//! Exit codes: 0 success (for `check`: criterion converged or the
//! sufficient condition applies), 2 config error, 3 criterion diverged,
//! 4 inconclusive, 5 internal numerical failure. Errors are emitted as
//! JSON on stderr.

// Validation uses negated comparisons (`!(x > 0.0)`) so NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use levy_ou::criteria;
use levy_ou::cylindrical::{Ball, CylModel, SimOptions};
use levy_ou::heat::HeatScenario;
use levy_ou::model::{GammaRule, Spectrum};
use levy_ou::numerics::Verdict;

use config::RunConfig;
use output::OutputDir;

#[derive(Parser)]
#[command(
    name = "levy-ou",
    about = "Ornstein-Uhlenbeck dynamics with cylindrical symmetric Levy noise: \
             membership criteria, truncated simulation, invariant-measure and \
             irreducibility diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config's "seed".
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker-thread cap; does not affect results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (default "out").
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Evaluate the cylindrical, OU and sufficient-condition criteria.
    Check,
    /// Simulate the truncated process and report partial-norm quantiles.
    Simulate,
    /// Sample the invariant measure; with "times", also report per-mode
    /// Kolmogorov-Smirnov convergence distances.
    Invariant,
    /// Estimate the probability of hitting an open ball.
    Irreducibility,
    /// Run the preconfigured stochastic heat equation scenario.
    Heat,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Simulate => "simulate",
            Command::Invariant => "invariant",
            Command::Irreducibility => "irreducibility",
            Command::Heat => "heat",
        }
    }
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    fn emit(&self) -> ExitCode {
        let (kind, message, code) = match self {
            Failure::Config(m) => ("config", m, 2),
            Failure::Numerical(m) => ("numerical", m, 5),
        };
        eprintln!("{}", json!({ "kind": kind, "error": message }));
        ExitCode::from(code)
    }
}

fn config_err<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn run_err<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Numerical(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Results do not depend on the pool size; ignore double-init in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(failure) => failure.emit(),
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config <path> is required".into()))?;
    let raw = std::fs::read_to_string(config_path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&raw).map_err(config_err)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));

    // The resolved config (file content + effective seed) is what the
    // manifest echoes and what the hash covers.
    let resolved = serde_json::to_string(&json!({
        "command": cli.command.name(),
        "seed": seed,
        "config": serde_json::from_str::<serde_json::Value>(&raw).map_err(config_err)?,
    }))
    .map_err(config_err)?;
    let mut out = OutputDir::create(&out_dir, seed, &resolved).map_err(Failure::Config)?;

    let code = match cli.command {
        Command::Check => cmd_check(&cfg, &mut out)?,
        Command::Simulate => cmd_simulate(&cfg, &mut out)?,
        Command::Invariant => cmd_invariant(&cfg, &mut out)?,
        Command::Irreducibility => cmd_irreducibility(&cfg, &mut out)?,
        Command::Heat => cmd_heat(&cfg, &mut out)?,
    };

    let manifest = json!({
        "command": cli.command.name(),
        "seed": seed,
        "config_sha256": out.config_hash,
        "threads": cli.threads,
        "config": serde_json::from_str::<serde_json::Value>(&raw).map_err(config_err)?,
        "outputs": out.files(),
    });
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).map_err(run_err)? + "\n",
    )
    .map_err(|e| Failure::Numerical(format!("cannot write manifest: {e}")))?;
    Ok(code)
}

fn sim_options(cfg: &RunConfig) -> Result<SimOptions, Failure> {
    let jump_cutoff = cfg.eps.unwrap_or(0.01);
    if !(jump_cutoff > 0.0) {
        return Err(Failure::Config(format!(
            "\"eps\" must be positive, got {jump_cutoff}"
        )));
    }
    Ok(SimOptions {
        jump_cutoff,
        gaussian_residual: cfg.gaussian_residual.unwrap_or(false),
    })
}

fn build_spectrum(cfg: &RunConfig, capacity: usize) -> Result<Spectrum, Failure> {
    let model = cfg.require_model().map_err(Failure::Config)?;
    Spectrum::new(model.spectrum.clone(), model.beta.clone(), capacity).map_err(config_err)
}

fn truncation_grid(cfg: &RunConfig) -> Result<Vec<usize>, Failure> {
    if let Some(grid) = &cfg.n_grid {
        if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
            return Err(Failure::Config(
                "\"n_grid\" must be strictly increasing and positive".into(),
            ));
        }
        return Ok(grid.clone());
    }
    let n = cfg.n_modes.ok_or_else(|| {
        Failure::Config("config needs \"n_grid\" or \"n_modes\"".into())
    })?;
    if n == 0 {
        return Err(Failure::Config("\"n_modes\" must be positive".into()));
    }
    let mut ladder: Vec<usize> = [n / 4, n / 2, 3 * n / 4, n]
        .iter()
        .copied()
        .filter(|&k| k >= 1)
        .collect();
    ladder.dedup();
    Ok(ladder)
}

fn cmd_check(cfg: &RunConfig, out: &mut OutputDir) -> Result<ExitCode, Failure> {
    let measure = cfg
        .require_measure()
        .map_err(Failure::Config)?
        .build()
        .map_err(config_err)?;
    let n_max = cfg.n_max.unwrap_or(256);
    if n_max < 16 {
        return Err(Failure::Config(format!(
            "\"n_max\" must be at least 16, got {n_max}"
        )));
    }
    let tol = cfg.tol.unwrap_or(1e-6);
    let t0 = cfg.t0.unwrap_or(1.0);
    if !(tol > 0.0 && t0 > 0.0) {
        return Err(Failure::Config("\"tol\" and \"t0\" must be positive".into()));
    }
    let spectrum = build_spectrum(cfg, n_max)?;

    let cylindrical =
        criteria::cylindrical_criterion(&measure, &spectrum, n_max, tol).map_err(run_err)?;
    let ou = criteria::ou_criterion(&measure, &spectrum, n_max, tol, t0).map_err(run_err)?;
    let sufficient =
        criteria::sufficient_condition(&measure, &spectrum, n_max).map_err(run_err)?;

    out.write_json("cylindrical.json", &cylindrical)
        .map_err(Failure::Numerical)?;
    out.write_csv(
        "cylindrical.csv",
        "n,term,partial_sum",
        &output::criterion_csv_rows(&cylindrical),
    )
    .map_err(Failure::Numerical)?;
    out.write_json("ou.json", &ou).map_err(Failure::Numerical)?;
    out.write_csv("ou.csv", "n,term,partial_sum", &output::criterion_csv_rows(&ou))
        .map_err(Failure::Numerical)?;
    out.write_json("sufficient.json", &sufficient)
        .map_err(Failure::Numerical)?;

    Ok(match (ou.verdict.verdict, sufficient.applies) {
        (Verdict::Converged, _) | (_, true) => ExitCode::SUCCESS,
        (Verdict::Diverged, _) => ExitCode::from(3),
        (Verdict::Inconclusive, _) => ExitCode::from(4),
    })
}

fn cmd_simulate(cfg: &RunConfig, out: &mut OutputDir) -> Result<ExitCode, Failure> {
    let measure = cfg
        .require_measure()
        .map_err(Failure::Config)?
        .build()
        .map_err(config_err)?;
    let m = cfg.require_trajectories().map_err(Failure::Config)?;
    let t = cfg
        .t
        .ok_or_else(|| Failure::Config("config needs \"t\"".into()))?;
    if !(t >= 0.0) {
        return Err(Failure::Config(format!("\"t\" must be nonnegative, got {t}")));
    }
    let grid = truncation_grid(cfg)?;
    let n_max = *grid.last().expect("nonempty");
    let x0 = cfg.x0.clone().unwrap_or_default();
    if x0.len() > n_max {
        return Err(Failure::Config(format!(
            "\"x0\" has {} coordinates but the truncation is {n_max}",
            x0.len()
        )));
    }
    let model = CylModel::new(build_spectrum(cfg, n_max)?, measure, sim_options(cfg)?);
    let stats = model
        .h_norm_profile(&x0, t, &grid, m, out.seed)
        .map_err(run_err)?;
    out.write_json("h_norm.json", &stats).map_err(Failure::Numerical)?;
    out.write_csv(
        "h_norm.csv",
        "quantity,n_or_N,time,value",
        &output::ensemble_csv_rows(&stats),
    )
    .map_err(Failure::Numerical)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_invariant(cfg: &RunConfig, out: &mut OutputDir) -> Result<ExitCode, Failure> {
    let measure = cfg
        .require_measure()
        .map_err(Failure::Config)?
        .build()
        .map_err(config_err)?;
    let m = cfg.require_trajectories().map_err(Failure::Config)?;
    let grid = truncation_grid(cfg)?;
    let n_max = *grid.last().expect("nonempty");
    let spectrum = build_spectrum(cfg, n_max)?;

    // The existence/uniqueness precondition; the classifier needs at least
    // 16 eigenvalues, which a short explicit prefix may not provide.
    let sufficient = match build_spectrum(cfg, n_max.max(16)) {
        Ok(s) => Some(
            criteria::sufficient_condition(&measure, &s, n_max.max(16)).map_err(run_err)?,
        ),
        Err(_) => None,
    };
    let model = CylModel::new(spectrum, measure, sim_options(cfg)?);

    let stats = model.invariant_profile(&grid, m, out.seed).map_err(run_err)?;
    out.write_json("invariant.json", &stats).map_err(Failure::Numerical)?;
    out.write_csv(
        "invariant.csv",
        "quantity,n_or_N,time,value",
        &output::ensemble_csv_rows(&stats),
    )
    .map_err(Failure::Numerical)?;

    // Per-mode KS convergence needs the exact stable law as the reference.
    let mut convergence_note = serde_json::Value::Null;
    if let Some(times) = &cfg.times {
        if model.measure.as_stable().is_some() {
            let n_modes = cfg.n_modes.unwrap_or(*grid.first().expect("nonempty"));
            let x0 = cfg.x0.clone().unwrap_or_default();
            let conv = model
                .convergence_to_invariant(&x0, times, n_modes.min(n_max), m, out.seed)
                .map_err(run_err)?;
            out.write_json("convergence.json", &conv)
                .map_err(Failure::Numerical)?;
            out.write_csv(
                "convergence.csv",
                "quantity,n_or_N,time,value",
                &output::ensemble_csv_rows(&conv),
            )
            .map_err(Failure::Numerical)?;
        } else {
            convergence_note = serde_json::Value::String(
                "convergence KS skipped: exact invariant laws are only \
                 available for the stable family"
                    .into(),
            );
        }
    }

    let applies = sufficient.as_ref().map(|s| s.applies);
    out.write_json(
        "invariant_preconditions.json",
        &serde_json::json!({
            "sufficient_condition_applies": applies,
            "warning": match applies {
                Some(true) => serde_json::Value::Null,
                Some(false) => serde_json::Value::String(
                    "sufficient condition does not apply; invariant-measure \
                     existence is not guaranteed for this model"
                        .into(),
                ),
                None => serde_json::Value::String(
                    "sufficient condition not evaluated: the explicit \
                     spectrum prefix is shorter than the classifier minimum"
                        .into(),
                ),
            },
            "convergence_note": convergence_note,
            "report": sufficient,
        }),
    )
    .map_err(Failure::Numerical)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_irreducibility(cfg: &RunConfig, out: &mut OutputDir) -> Result<ExitCode, Failure> {
    let measure = cfg
        .require_measure()
        .map_err(Failure::Config)?
        .build()
        .map_err(config_err)?;
    let m = cfg.require_trajectories().map_err(Failure::Config)?;
    let ball_cfg = cfg
        .ball
        .as_ref()
        .ok_or_else(|| Failure::Config("config needs a \"ball\"".into()))?;
    if !(ball_cfg.radius > 0.0) {
        return Err(Failure::Config("ball radius must be positive".into()));
    }
    let t = cfg
        .t
        .ok_or_else(|| Failure::Config("config needs \"t\"".into()))?;
    let n_modes = cfg
        .n_modes
        .ok_or_else(|| Failure::Config("config needs \"n_modes\"".into()))?;
    if ball_cfg.center.len() > n_modes {
        return Err(Failure::Config(format!(
            "ball center has {} coordinates but the truncation is {n_modes}",
            ball_cfg.center.len()
        )));
    }
    let x0 = cfg.x0.clone().unwrap_or_default();
    if x0.len() > n_modes {
        return Err(Failure::Config(format!(
            "\"x0\" has {} coordinates but the truncation is {n_modes}",
            x0.len()
        )));
    }
    let model = CylModel::new(build_spectrum(cfg, n_modes)?, measure, sim_options(cfg)?);
    let ball = Ball {
        center: ball_cfg.center.clone(),
        radius: ball_cfg.radius,
    };
    let stats = model
        .irreducibility_estimate(&x0, &ball, t, n_modes, m, out.seed)
        .map_err(run_err)?;
    let applicable = stats
        .hits
        .as_ref()
        .map(|h| h.theorem_applicable)
        .unwrap_or(false);
    out.write_json(
        "irreducibility.json",
        &serde_json::json!({
            "note": if applicable {
                serde_json::Value::Null
            } else {
                serde_json::Value::String("theorem not applicable; estimate only".into())
            },
            "stats": stats,
        }),
    )
    .map_err(Failure::Numerical)?;
    out.write_csv(
        "irreducibility.csv",
        "quantity,n_or_N,time,value",
        &output::ensemble_csv_rows(&stats),
    )
    .map_err(Failure::Numerical)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_heat(cfg: &RunConfig, out: &mut OutputDir) -> Result<ExitCode, Failure> {
    let measure = cfg
        .require_measure()
        .map_err(Failure::Config)?
        .build()
        .map_err(config_err)?;
    let m = cfg.require_trajectories().map_err(Failure::Config)?;
    let heat_cfg = cfg
        .heat
        .as_ref()
        .ok_or_else(|| Failure::Config("config needs a \"heat\" record".into()))?;
    let times = cfg
        .times
        .clone()
        .ok_or_else(|| Failure::Config("config needs \"times\"".into()))?;
    let model = cfg.require_model().map_err(Failure::Config)?;
    if let GammaRule::Laplacian { d } = &model.spectrum {
        if *d != heat_cfg.d {
            return Err(Failure::Config(format!(
                "heat dimension {} disagrees with the spectrum dimension {d}",
                heat_cfg.d
            )));
        }
    } else {
        return Err(Failure::Config(
            "the heat scenario needs a laplacian spectrum".into(),
        ));
    }

    let scenario = HeatScenario {
        d: heat_cfg.d,
        n_modes: heat_cfg.n_modes,
        measure,
        beta_rule: model.beta.clone(),
        initial_modes: heat_cfg.x0_modes.clone(),
        grid_points_per_axis: heat_cfg.grid_points,
        sim: sim_options(cfg)?,
    };
    let run = scenario.run(&times, m, out.seed).map_err(run_err)?;

    for (k, snapshot) in run.snapshots.iter().enumerate() {
        let mut header = String::new();
        for axis in 1..=heat_cfg.d {
            header.push_str(&format!("xi_{axis},"));
        }
        header.push('u');
        let rows: Vec<String> = run
            .grid
            .iter()
            .zip(&snapshot.values)
            .map(|(point, value)| {
                let mut row = String::new();
                for c in point {
                    row.push_str(&format!("{c},"));
                }
                row.push_str(&format!("{value}"));
                row
            })
            .collect();
        out.write_csv(&format!("snapshot_{k:03}.csv"), &header, &rows)
            .map_err(Failure::Numerical)?;
    }
    out.write_json(
        "heat.json",
        &serde_json::json!({
            "criterion": run.criterion,
            "sufficient": run.sufficient,
            "snapshot_times": times,
            "stats": run.stats,
        }),
    )
    .map_err(Failure::Numerical)?;
    out.write_csv(
        "heat_stats.csv",
        "quantity,n_or_N,time,value",
        &output::ensemble_csv_rows(&run.stats),
    )
    .map_err(Failure::Numerical)?;
    Ok(ExitCode::SUCCESS)
}

//! Machine-readable outputs: JSON documents and long-format CSV tables,
//! every file stamped with the seed and the config hash so reruns are
//! attributable and byte-comparable.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use levy_ou::criteria::CriterionReport;
use levy_ou::cylindrical::EnsembleStats;

pub struct OutputDir {
    dir: PathBuf,
    pub seed: u64,
    pub config_hash: String,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path, seed: u64, config_json: &str) -> Result<Self, String> {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(config_json.as_bytes());
        let digest = hasher.finalize();
        let mut config_hash = String::with_capacity(64);
        for b in digest {
            let _ = write!(config_hash, "{b:02x}");
        }
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            seed,
            config_hash,
            written: Vec::new(),
        })
    }

    fn stamp(&self) -> String {
        format!("# seed={} config_sha256={}\n", self.seed, self.config_hash)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), String> {
        let body = serde_json::json!({
            "seed": self.seed,
            "config_sha256": self.config_hash,
            "data": value,
        });
        let text = serde_json::to_string_pretty(&body).map_err(|e| e.to_string())?;
        self.write_raw(name, &(text + "\n"))
    }

    pub fn write_csv(&mut self, name: &str, header: &str, rows: &[String]) -> Result<(), String> {
        let mut text = self.stamp();
        text.push_str(header);
        text.push('\n');
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        self.write_raw(name, &text)
    }

    fn write_raw(&mut self, name: &str, text: &str) -> Result<(), String> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }
}

/// Criterion report as (n, term, partial_sum) rows.
pub fn criterion_csv_rows(report: &CriterionReport) -> Vec<String> {
    report
        .terms
        .iter()
        .zip(&report.partial_sums)
        .enumerate()
        .map(|(i, (t, p))| format!("{},{},{}", i + 1, t, p))
        .collect()
}

/// Ensemble statistics in the long format `quantity,n_or_N,time,value`.
pub fn ensemble_csv_rows(stats: &EnsembleStats) -> Vec<String> {
    let mut rows = Vec::new();
    for q in &stats.partial_norm_quantiles {
        rows.push(format!("q25,{},{},{}", q.n_modes, q.time, q.q25));
        rows.push(format!("q50,{},{},{}", q.n_modes, q.time, q.q50));
        rows.push(format!("q75,{},{},{}", q.n_modes, q.time, q.q75));
    }
    for c in &stats.coordinate_ks {
        rows.push(format!("ks,{},{},{}", c.coordinate, c.time, c.ks));
        if let Some(a) = c.analytic_ks {
            rows.push(format!("analytic_ks,{},{},{}", c.coordinate, c.time, a));
        }
    }
    if let Some(h) = &stats.hits {
        rows.push(format!("hits,{},0,{}", h.trials, h.hits));
        rows.push(format!("p_hat,{},0,{}", h.trials, h.p_hat));
        rows.push(format!("wilson_low,{},0,{}", h.trials, h.wilson_low));
        rows.push(format!("wilson_high,{},0,{}", h.trials, h.wilson_high));
        if let Some(lb) = &h.lower_bound {
            rows.push(format!("split_lower_bound,{},0,{}", lb.k_split, lb.value));
        }
    }
    rows
}

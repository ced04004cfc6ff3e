//! Piecewise power-law one-sided densities with declared endpoint behavior.
//!
//! A `TableMeasure` is a list of pieces `c · y^p · (ln y)^q` between
//! consecutive breakpoints, the first piece extending to 0 and the last to
//! ∞. The declared exponents let the module *certify* integrability (Lévy
//! condition near 0, tail mass and log-moment finiteness at ∞) instead of
//! guessing from samples; values are then closed-form where the
//! antiderivative is elementary and quadrature otherwise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{exponent, MeasureError};
use crate::numerics::{self, QuadOptions};

/// One density piece `coef · y^exponent · (ln y)^log_exponent`.
///
/// `log_exponent` must be ≤ 0 and may be nonzero only on pieces whose lower
/// endpoint exceeds 1 (so the logarithm is positive and bounded away from 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPiece {
    pub coef: f64,
    pub exponent: f64,
    #[serde(default)]
    pub log_exponent: f64,
}

impl PowerPiece {
    pub fn power(coef: f64, exponent: f64) -> Self {
        PowerPiece {
            coef,
            exponent,
            log_exponent: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableMeasure {
    /// Strictly increasing positive breakpoints; piece `i` lives on
    /// `(breakpoints[i-1], breakpoints[i]]` with the obvious conventions at
    /// the ends. May be empty (a single piece on all of (0,∞)).
    breakpoints: Vec<f64>,
    pieces: Vec<PowerPiece>,
}

#[derive(Clone, Copy, PartialEq)]
enum Weight {
    One,
    Squared,
    Log,
}

/// ψ₀ queries are saturated here; the scaled uses `b²ψ₀(1/b)` make the
/// truncation error negligible for every valid tail exponent.
const VARIANCE_CAP: f64 = 1e150;

impl TableMeasure {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<PowerPiece>) -> Result<Self, MeasureError> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(MeasureError::InvalidParameter(format!(
                "need exactly {} pieces for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                pieces.len()
            )));
        }
        for w in breakpoints.windows(2) {
            if !(w[0] < w[1]) {
                return Err(MeasureError::InvalidParameter(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
        }
        if let Some(&b0) = breakpoints.first() {
            if !(b0 > 0.0 && b0.is_finite()) {
                return Err(MeasureError::InvalidParameter(
                    "breakpoints must be positive and finite".into(),
                ));
            }
        }
        if let Some(&bl) = breakpoints.last() {
            if !bl.is_finite() {
                return Err(MeasureError::InvalidParameter(
                    "breakpoints must be finite".into(),
                ));
            }
        }
        let m = TableMeasure {
            breakpoints,
            pieces,
        };
        for (i, piece) in m.pieces.iter().enumerate() {
            let (lo, _) = m.piece_bounds(i);
            if !(piece.coef >= 0.0 && piece.coef.is_finite()) {
                return Err(MeasureError::InvalidParameter(format!(
                    "piece {i}: coefficient must be finite and nonnegative"
                )));
            }
            if !piece.exponent.is_finite() || !piece.log_exponent.is_finite() {
                return Err(MeasureError::InvalidParameter(format!(
                    "piece {i}: exponents must be finite"
                )));
            }
            if piece.log_exponent > 0.0 {
                return Err(MeasureError::InvalidParameter(format!(
                    "piece {i}: positive log exponents are not supported"
                )));
            }
            if piece.log_exponent != 0.0 && !(lo > 1.0) {
                return Err(MeasureError::InvalidParameter(format!(
                    "piece {i}: a log-corrected piece must start above 1, starts at {lo}"
                )));
            }
        }
        let head = &m.pieces[0];
        if head.coef > 0.0 && head.exponent <= -3.0 {
            return Err(MeasureError::InvalidParameter(format!(
                "head exponent {} violates Lévy integrability near 0 (need > -3)",
                head.exponent
            )));
        }
        let tail = &m.pieces[m.pieces.len() - 1];
        let tail_ok = tail.coef == 0.0
            || tail.exponent < -1.0
            || (tail.exponent == -1.0 && tail.log_exponent < -1.0);
        if !tail_ok {
            return Err(MeasureError::InvalidParameter(format!(
                "tail piece y^{}(ln y)^{} has infinite mass: not a Lévy measure",
                tail.exponent, tail.log_exponent
            )));
        }
        Ok(m)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[PowerPiece] {
        &self.pieces
    }

    /// (lower, upper) endpoints of piece `i`; `0` and `∞` at the ends.
    fn piece_bounds(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { 0.0 } else { self.breakpoints[i - 1] };
        let hi = if i == self.breakpoints.len() {
            f64::INFINITY
        } else {
            self.breakpoints[i]
        };
        (lo, hi)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.coef == 0.0)
    }

    pub fn supports_zero(&self) -> bool {
        self.pieces[0].coef > 0.0
    }

    pub(crate) fn head_mass_finite(&self) -> bool {
        let head = &self.pieces[0];
        head.coef == 0.0 || head.exponent > -1.0
    }

    pub fn density(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b < y);
        let p = &self.pieces[i];
        if p.coef == 0.0 {
            return 0.0;
        }
        let mut v = p.coef * y.powf(p.exponent);
        if p.log_exponent != 0.0 {
            v *= y.ln().powf(p.log_exponent);
        }
        v
    }

    /// One-sided `∫_0^u y² p(y) dy`, saturated at `VARIANCE_CAP`.
    pub(crate) fn partial_second_moment(&self, u: f64) -> Result<f64, MeasureError> {
        let u = u.min(VARIANCE_CAP);
        let mut total = 0.0;
        for i in 0..self.pieces.len() {
            let (lo, hi) = self.piece_bounds(i);
            let hi = hi.min(u);
            if hi <= lo {
                continue;
            }
            total += self.piece_integral(&self.pieces[i], lo, hi, Weight::Squared)?;
        }
        Ok(total)
    }

    /// One-sided `∫_u^∞ p(y) dy`.
    pub(crate) fn tail_mass_from(&self, u: f64) -> Result<f64, MeasureError> {
        let mut total = 0.0;
        for i in 0..self.pieces.len() {
            let (lo, hi) = self.piece_bounds(i);
            let lo = lo.max(u);
            if hi <= lo {
                continue;
            }
            total += self.piece_integral(&self.pieces[i], lo, hi, Weight::One)?;
        }
        Ok(total)
    }

    /// `∫_1^∞ ln(y) p(y) dy`, `+∞` when the declared tail exponents make it
    /// divergent.
    pub(crate) fn log_tail_moment(&self) -> Result<f64, MeasureError> {
        self.partial_log_moment(f64::INFINITY)
    }

    /// `∫_1^b ln(y) p(y) dy` (one-sided); `+∞` only when `b = ∞` and the
    /// tail diverges.
    pub(crate) fn partial_log_moment(&self, b: f64) -> Result<f64, MeasureError> {
        let mut total = 0.0;
        for i in 0..self.pieces.len() {
            let (lo, hi) = self.piece_bounds(i);
            let lo = lo.max(1.0);
            let hi = hi.min(b);
            if hi <= lo {
                continue;
            }
            let v = self.piece_integral(&self.pieces[i], lo, hi, Weight::Log)?;
            if v.is_infinite() {
                return Ok(f64::INFINITY);
            }
            total += v;
        }
        Ok(total)
    }

    /// `∫ y^(exponent+k) (ln y)^(log_exponent+j) dy` over `[lo, hi]` where
    /// (k, j) encode the weight. Divergent integrals return `+∞`; they can
    /// only arise for the log weight because of the constructor validation.
    fn piece_integral(
        &self,
        piece: &PowerPiece,
        lo: f64,
        hi: f64,
        weight: Weight,
    ) -> Result<f64, MeasureError> {
        if piece.coef == 0.0 || hi <= lo {
            return Ok(0.0);
        }
        let c = piece.coef;
        let e = piece.exponent
            + match weight {
                Weight::Squared => 2.0,
                _ => 0.0,
            };
        let q = piece.log_exponent
            + match weight {
                Weight::Log => 1.0,
                _ => 0.0,
            };

        if q == 0.0 {
            return Ok(c * power_integral(e, lo, hi));
        }
        if piece.log_exponent == 0.0 && weight == Weight::Log {
            // ∫ y^e ln y dy has the elementary antiderivative
            // y^{e+1}((e+1)ln y - 1)/(e+1)².
            if e == -1.0 {
                // ∫ ln(y)/y dy = ln²(y)/2.
                if hi.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                return Ok(c * 0.5 * (hi.ln().powi(2) - lo.ln().powi(2)));
            }
            let anti = |y: f64| y.powf(e + 1.0) * ((e + 1.0) * y.ln() - 1.0) / (e + 1.0).powi(2);
            if hi.is_infinite() {
                if e > -1.0 {
                    return Ok(f64::INFINITY);
                }
                return Ok(-c * anti(lo));
            }
            return Ok(c * (anti(hi) - anti(lo)));
        }

        // Log-corrected piece: substitute t = ln y (lower bound > 1 by
        // validation, so t > 0).
        let t1 = lo.ln();
        let s = e + 1.0;
        if hi.is_infinite() && (s > 0.0 || (s == 0.0 && q >= -1.0)) {
            return Ok(f64::INFINITY);
        }
        if s == 0.0 {
            // ∫ t^q dt.
            let anti = |t: f64| t.powf(q + 1.0) / (q + 1.0);
            if hi.is_infinite() {
                return Ok(-c * anti(t1));
            }
            return Ok(c * (anti(hi.ln()) - anti(t1)));
        }
        let g = move |t: f64| (s * t).exp() * t.powf(q);
        let upper = if hi.is_infinite() { f64::INFINITY } else { hi.ln() };
        let r = numerics::integrate_with(g, t1, upper, &QuadOptions::tolerances(1e-13, 1e-10))?;
        Ok(c * r.value)
    }

    /// `∫_0^∞ (1 - cos(hy)) p(y) dy` through the oscillatory scheme.
    pub(crate) fn one_sided_exponent(&self, h: f64) -> Result<f64, MeasureError> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let tail = self.pieces[self.pieces.len() - 1];
        let last_bp = self.breakpoints.last().copied().unwrap_or(1.0);
        let density = |y: f64| self.density(y);
        let d1 = move |y: f64| {
            let l = y.ln();
            tail.coef
                * y.powf(tail.exponent - 1.0)
                * (tail.exponent * l.powf(tail.log_exponent)
                    + tail.log_exponent * l.powf(tail.log_exponent - 1.0))
        };
        let d2 = move |y: f64| {
            let (p, q) = (tail.exponent, tail.log_exponent);
            let l = y.ln();
            tail.coef
                * y.powf(p - 2.0)
                * (p * (p - 1.0) * l.powf(q)
                    + q * (2.0 * p - 1.0) * l.powf(q - 1.0)
                    + q * (q - 1.0) * l.powf(q - 2.0))
        };
        let tail_mass = |t: f64| self.tail_mass_from(t);
        let min_tail_start = if tail.log_exponent != 0.0 {
            last_bp.max(10.0)
        } else {
            last_bp.max(1.0)
        };
        let info = exponent::DensityTail {
            density: &density,
            density_d1: &d1,
            density_d2: &d2,
            tail_mass_from: &tail_mass,
            min_tail_start,
            breakpoints: self.breakpoints.clone(),
        };
        exponent::one_sided_exponent(&info, h, 1e-12)
    }

    /// Draw a one-sided magnitude from `p` restricted to `(eps, ∞)`.
    pub(crate) fn sample_magnitude<R: Rng + ?Sized>(
        &self,
        eps: f64,
        rng: &mut R,
    ) -> Result<f64, MeasureError> {
        let mut cells: Vec<(usize, f64, f64, f64)> = Vec::new(); // (piece, lo, hi, mass)
        let mut total = 0.0;
        for i in 0..self.pieces.len() {
            let (lo, hi) = self.piece_bounds(i);
            let lo = lo.max(eps);
            if hi <= lo || self.pieces[i].coef == 0.0 {
                continue;
            }
            let mass = self.piece_integral(&self.pieces[i], lo, hi, Weight::One)?;
            if mass > 0.0 {
                total += mass;
                cells.push((i, lo, hi, mass));
            }
        }
        if cells.is_empty() {
            return Err(MeasureError::InvalidParameter(format!(
                "no mass above the cutoff {eps}"
            )));
        }
        let mut target = rng.random::<f64>() * total;
        let mut chosen = cells.len() - 1;
        for (k, cell) in cells.iter().enumerate() {
            target -= cell.3;
            if target <= 0.0 {
                chosen = k;
                break;
            }
        }
        let (i, lo, hi, _) = cells[chosen];
        let piece = &self.pieces[i];
        if piece.log_exponent == 0.0 {
            Ok(sample_power(piece.exponent, lo, hi, rng))
        } else {
            // Power envelope with the decreasing log factor frozen at its
            // maximum (the lower endpoint).
            let lmax = lo.ln().powf(piece.log_exponent);
            for _ in 0..100_000 {
                let y = sample_power(piece.exponent, lo, hi, rng);
                let accept = y.ln().powf(piece.log_exponent) / lmax;
                if rng.random::<f64>() < accept {
                    return Ok(y);
                }
            }
            Err(MeasureError::Unsupported(
                "log-piece rejection sampler stalled".into(),
            ))
        }
    }
}

/// `∫_lo^hi y^e dy`, `+∞` when divergent.
fn power_integral(e: f64, lo: f64, hi: f64) -> f64 {
    if e == -1.0 {
        if hi.is_infinite() {
            return f64::INFINITY;
        }
        return (hi / lo).ln();
    }
    let s = e + 1.0;
    if hi.is_infinite() {
        if s >= 0.0 {
            return f64::INFINITY;
        }
        return -lo.powf(s) / s;
    }
    if lo == 0.0 {
        if s <= 0.0 {
            return f64::INFINITY;
        }
        return hi.powf(s) / s;
    }
    (hi.powf(s) - lo.powf(s)) / s
}

/// Inverse-CDF draw from the density ∝ `y^e` on `[lo, hi]` (`hi` may be ∞
/// when `e < -1`).
fn sample_power<R: Rng + ?Sized>(e: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    if e == -1.0 {
        return lo * (hi / lo).powf(u);
    }
    let s = e + 1.0;
    if hi.is_infinite() {
        return lo * (1.0 - u).powf(1.0 / s);
    }
    let (a, b) = (lo.powf(s), hi.powf(s));
    (a + u * (b - a)).powf(1.0 / s)
}

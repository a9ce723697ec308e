//! One-dimensional global maximization: coarse scan plus golden-section polish.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub coarse_points: usize,
    pub refine_tol: f64,
    /// Upper end of the search interval; `None` lets the caller pick one.
    pub delta_max: Option<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { coarse_points: 256, refine_tol: 1e-9, delta_max: None }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_points < 8 {
            return Err(Error::Invalid(format!("coarse_points must be >= 8, got {}", self.coarse_points)));
        }
        if !(self.refine_tol > 0.0 && self.refine_tol.is_finite()) {
            return Err(Error::Invalid("refine_tol must be positive".into()));
        }
        if let Some(d) = self.delta_max {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Invalid("delta_max must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub max: f64,
}

/// Maximizes `f` on `[lo, hi]`: `coarse_points` equispaced samples, then a
/// golden-section search inside the bracket around the best sample.
pub fn maximize_1d<F>(mut f: F, lo: f64, hi: f64, cfg: &SearchConfig) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Contract(format!("maximize_1d needs finite lo < hi, got [{lo}, {hi}]")));
    }
    let n = cfg.coarse_points.max(8);
    let xs: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect();
    maximize_over(&mut f, &xs, cfg.refine_tol)
}

/// Maximizes over a sorted candidate set, then polishes between the best
/// candidate's neighbours. The result is never below the best candidate.
pub fn maximize_over<F>(f: &mut F, candidates: &[f64], refine_tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if candidates.is_empty() {
        return Err(Error::Contract("no candidate points to maximize over".into()));
    }
    if candidates.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Contract("candidate points must be strictly increasing".into()));
    }
    let mut best = Maximum { argmax: candidates[0], max: f64::NEG_INFINITY };
    let mut best_idx = 0;
    for (i, &x) in candidates.iter().enumerate() {
        let v = f(x)?;
        if v > best.max {
            best = Maximum { argmax: x, max: v };
            best_idx = i;
        }
    }
    let a = candidates[best_idx.saturating_sub(1)];
    let b = candidates[(best_idx + 1).min(candidates.len() - 1)];
    if b > a {
        let polished = golden_section_max(f, a, b, refine_tol)?;
        if polished.max > best.max {
            best = polished;
        }
    }
    Ok(best)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section_max<F>(f: &mut F, mut a: f64, mut b: f64, tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut iters = 0;
    while (b - a).abs() > tol * (1.0 + c.abs()) && iters < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        iters += 1;
    }
    Ok(if fc > fd { Maximum { argmax: c, max: fc } } else { Maximum { argmax: d, max: fd } })
}

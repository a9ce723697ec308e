//! Sampling grids for the outer separation integral.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Spacing {
    Linear,
    /// Half of the points log-spaced on `[t_min, split]`, the rest linear on
    /// `[split, t_max]`.
    LogLinear { t_min: f64, split: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_max: f64,
    pub n_points: usize,
    pub spacing: Spacing,
    /// Isolated offsets evaluated in addition to the grid (critical offsets
    /// of atomic priors).
    #[serde(default)]
    pub extra_atoms: Vec<f64>,
    /// Ordinary grid points added where the curve is known to kink.
    #[serde(default)]
    pub kinks: Vec<f64>,
}

impl GridSpec {
    pub fn linear(t_max: f64, n_points: usize) -> Self {
        Self { t_max, n_points, spacing: Spacing::Linear, extra_atoms: Vec::new(), kinks: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Invalid(format!("grid t_max must be positive, got {}", self.t_max)));
        }
        if self.n_points < 2 {
            return Err(Error::Invalid("grid needs at least two points".into()));
        }
        if let Spacing::LogLinear { t_min, split } = self.spacing {
            if !(t_min > 0.0 && t_min < split && split < self.t_max) {
                return Err(Error::Invalid(format!(
                    "log-linear grid needs 0 < t_min < split < t_max, got {t_min}, {split}, {}",
                    self.t_max
                )));
            }
        }
        Ok(())
    }

    /// Strictly increasing grid points in `(0, t_max]`, kinks included,
    /// extra atoms excluded.
    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points;
        let mut pts: Vec<f64> = match self.spacing {
            Spacing::Linear => (1..=n).map(|i| self.t_max * (i as f64 / n as f64)).collect(),
            Spacing::LogLinear { t_min, split } => {
                let n_log = n / 2;
                let n_lin = n - n_log;
                let (l0, l1) = (t_min.ln(), split.ln());
                let mut v: Vec<f64> = (0..n_log)
                    .map(|i| (l0 + (l1 - l0) * i as f64 / n_log as f64).exp())
                    .collect();
                v.extend((0..n_lin).map(|i| {
                    if i + 1 == n_lin {
                        self.t_max
                    } else {
                        split + (self.t_max - split) * i as f64 / (n_lin - 1).max(1) as f64
                    }
                }));
                v
            }
        };
        pts.extend(self.kinks.iter().copied().filter(|k| *k > 0.0 && *k <= self.t_max));
        sort_dedup(&mut pts, self.t_max);
        pts
    }

    /// Extra atoms, sorted, deduplicated and clipped to `(0, t_max]`.
    pub fn atoms(&self) -> Vec<f64> {
        let mut a: Vec<f64> = self.extra_atoms.iter().copied().filter(|x| *x > 0.0 && *x <= self.t_max).collect();
        sort_dedup(&mut a, self.t_max);
        a
    }
}

fn sort_dedup(v: &mut Vec<f64>, scale: f64) {
    v.retain(|x| x.is_finite());
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale);
}

/// Replaces each value by the maximum over itself and every later sample.
///
/// `samples` are `(t, value)` pairs with strictly increasing `t`.
pub fn suffix_max(samples: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if samples.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::Contract("suffix_max needs strictly increasing t".into()));
    }
    let mut out = samples.to_vec();
    let mut running = f64::NEG_INFINITY;
    for s in out.iter_mut().rev() {
        running = running.max(s.1);
        s.1 = running;
    }
    Ok(out)
}

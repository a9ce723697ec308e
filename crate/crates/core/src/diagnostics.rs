//! Sampled checks of the conditions under which the bounds are tight.
//!
//! A failed check comes with witnesses and is conclusive. A passed check only
//! covers the sampled points.

use rayon::prelude::*;
use serde::Serialize;

use crate::baseline::{OracleConfig, Posterior};
use crate::channel::AwgnChannel;
use crate::error::{Error, Result};
use crate::numerics::search::golden_section_max;
use crate::numerics::seeded_stream;
use crate::prior::ScalarPrior;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    UnimodalSymmetricPosterior,
    ArgmaxIntersection,
    TwoValuedError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Observation(f64),
    Sample { x: f64, y: f64, t: f64 },
    ErrorMagnitude(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessVerdict {
    pub condition: Condition,
    pub holds: bool,
    pub witnesses: Vec<Witness>,
    pub tolerance: f64,
}

impl TightnessVerdict {
    fn new(condition: Condition, witnesses: Vec<Witness>, tolerance: f64) -> Self {
        Self { condition, holds: witnesses.is_empty(), witnesses, tolerance }
    }
}

const SHAPE_GRID: usize = 2001;
const MIRROR_PAIRS: usize = 64;

fn require_continuous(prior: &ScalarPrior) -> Result<(f64, f64)> {
    if !prior.is_continuous() {
        return Err(Error::Unsupported("this check needs a continuous prior".into()));
    }
    Ok(prior.continuous_support().expect("continuous prior has support"))
}

/// Unnormalized log posterior `ln f(x) − (y − x)²/(2η)`.
fn log_post(prior: &ScalarPrior, eta: f64, x: f64, y: f64) -> f64 {
    let f = prior.density_at(x);
    if f <= 0.0 {
        return f64::NEG_INFINITY;
    }
    prior.log_density_at(x) - (y - x) * (y - x) / (2.0 * eta)
}

/// Whether the posterior at each `y` is unimodal and symmetric about its mode.
pub fn check_posterior_shape(
    prior: &ScalarPrior,
    ch: &AwgnChannel,
    y_grid: &[f64],
    tol: f64,
) -> Result<TightnessVerdict> {
    let (lo, hi) = require_continuous(prior)?;
    let eta = ch.eta();
    let reach = 12.0 * ch.sigma();
    let failing: Vec<Option<Witness>> = y_grid
        .par_iter()
        .map(|&y| {
            let (a, b) = (lo.max(y - reach), hi.min(y + reach));
            if !(a < b) {
                return None;
            }
            let xs: Vec<f64> = (0..SHAPE_GRID).map(|i| a + (b - a) * i as f64 / (SHAPE_GRID - 1) as f64).collect();
            let lp: Vec<f64> = xs.iter().map(|&x| log_post(prior, eta, x, y)).collect();
            let (imax, lmax) = lp.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
            let dens: Vec<f64> = lp.iter().map(|l| (l - lmax).exp()).collect();

            // Unimodal: no rise after a fall, ignoring changes below tol.
            let mut falling = false;
            for w in dens.windows(2) {
                let d = w[1] - w[0];
                if d < -tol {
                    falling = true;
                } else if d > tol && falling {
                    return Some(Witness::Observation(y));
                }
            }

            let l = xs[imax.saturating_sub(1)];
            let r = xs[(imax + 1).min(xs.len() - 1)];
            let mut f = |x: f64| Ok::<_, Error>(log_post(prior, eta, x, y));
            let mode = if r > l {
                golden_section_max(&mut f, l, r, 1e-12).map(|m| if m.max >= lmax { m.argmax } else { xs[imax] }).ok()?
            } else {
                xs[imax]
            };
            let peak = log_post(prior, eta, mode, y).max(lmax);
            let span = (mode - a).max(b - mode);
            for k in 1..=MIRROR_PAIRS {
                let u = span * k as f64 / MIRROR_PAIRS as f64;
                let left = (log_post(prior, eta, mode - u, y) - peak).exp();
                let right = (log_post(prior, eta, mode + u, y) - peak).exp();
                if (left - right).abs() > tol {
                    return Some(Witness::Observation(y));
                }
            }
            None
        })
        .collect();
    Ok(TightnessVerdict::new(Condition::UnimodalSymmetricPosterior, failing.into_iter().flatten().collect(), tol))
}

/// Default `(x, y, t)` sample grid: `nx × ny × nt` points covering the
/// support, the observations it produces, and separations up to the spread.
pub fn argmax_sample_grid(prior: &ScalarPrior, ch: &AwgnChannel, nx: usize, ny: usize, nt: usize) -> Vec<(f64, f64, f64)> {
    let (mean, var) = prior.mean_variance();
    let r = 3.0 * var.sqrt();
    let ry = r + 3.0 * ch.sigma();
    let lin = |lo: f64, hi: f64, n: usize, i: usize| if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
    let mut out = Vec::with_capacity(nx * ny * nt);
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nt {
                let t = 2.0 * r * (k + 1) as f64 / nt as f64;
                out.push((lin(mean - r, mean + r, nx, i), lin(mean - ry, mean + ry, ny, j), t));
            }
        }
    }
    out
}

/// Whether, at each sample, the most probable lattice point `x + kt` is also
/// one closest to the posterior mean. Off-axis offset components are zero.
pub fn check_prop6_condition(
    prior: &ScalarPrior,
    ch: &AwgnChannel,
    m: usize,
    samples: &[(f64, f64, f64)],
    tol: f64,
    cfg: &crate::numerics::QuadratureConfig,
) -> Result<TightnessVerdict> {
    require_continuous(prior)?;
    crate::detect::check_args(1.0, m)?;
    let post = Posterior::new(prior, ch, cfg);
    let eta = ch.eta();
    let mut ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let means: Vec<f64> = ys.par_iter().map(|&y| post.mean(y)).collect::<Vec<Result<f64>>>().into_iter().collect::<Result<_>>()?;
    let mean_at = |y: f64| means[ys.binary_search_by(|v| v.total_cmp(&y)).expect("y was collected")];
    let verdicts: Vec<Result<Option<Witness>>> = samples
        .par_iter()
        .map(|&(x, y, t)| {
            let mean = mean_at(y);
            let lp: Vec<f64> = (0..m).map(|k| log_post(prior, eta, x + k as f64 * t, y)).collect();
            let best = lp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if best == f64::NEG_INFINITY {
                return Ok(None);
            }
            let dist: Vec<f64> = (0..m).map(|k| (mean - x - k as f64 * t).abs()).collect();
            let closest = dist.iter().cloned().fold(f64::INFINITY, f64::min);
            let hit = (0..m).any(|k| {
                let is_max = lp[k] > f64::NEG_INFINITY && (lp[k] - best).exp() >= 1.0 - tol;
                let is_min = dist[k] - closest <= tol * t;
                is_max && is_min
            });
            Ok((!hit).then_some(Witness::Sample { x, y, t }))
        })
        .collect();
    let mut witnesses = Vec::new();
    for v in verdicts {
        if let Some(w) = v? {
            witnesses.push(w);
        }
    }
    Ok(TightnessVerdict::new(Condition::ArgmaxIntersection, witnesses, tol))
}

/// Whether `|E[X|Y] − X|` is concentrated on at most two values.
pub fn check_prop7_atoms(
    prior: &ScalarPrior,
    ch: &AwgnChannel,
    mc: &OracleConfig,
    cluster_tol: f64,
) -> Result<TightnessVerdict> {
    mc.validate()?;
    if !(cluster_tol > 0.0) {
        return Err(Error::Invalid("cluster_tol must be positive".into()));
    }
    let post = Posterior::new(prior, ch, &mc.quad);
    const CHUNK: usize = 4096;
    let chunks = mc.samples.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seeded_stream(mc.seed, c as u64);
            let len = CHUNK.min(mc.samples - c * CHUNK);
            (0..len)
                .map(|_| {
                    let x = prior.sample(&mut rng);
                    let y = ch.sample(x, &mut rng);
                    Ok((post.mean(y)? - x).abs())
                })
                .collect()
        })
        .collect();
    let mut errs: Vec<f64> = Vec::with_capacity(mc.samples);
    for p in parts {
        errs.extend(p?);
    }
    errs.sort_by(f64::total_cmp);

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=errs.len() {
        if i == errs.len() || errs[i] - errs[i - 1] > cluster_tol {
            clusters.push((start, i));
            start = i;
        }
    }
    let mut witnesses = Vec::new();
    for (k, &(a, b)) in clusters.iter().enumerate() {
        let center = errs[a..b].iter().sum::<f64>() / (b - a) as f64;
        let loose = errs[a..b].iter().find(|e| (*e - center).abs() > cluster_tol);
        if k >= 2 {
            witnesses.push(Witness::ErrorMagnitude(center));
        } else if let Some(e) = loose {
            witnesses.push(Witness::ErrorMagnitude(*e));
        }
        if witnesses.len() >= 16 {
            break;
        }
    }
    Ok(TightnessVerdict::new(Condition::TwoValuedError, witnesses, cluster_tol))
}

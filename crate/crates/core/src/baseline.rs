//! Reference quantities the bounds are compared against: the MMSE itself,
//! Bayesian Cramér-Rao bounds and the maximum-entropy bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::AwgnChannel;
use crate::error::{Error, Result};
use crate::numerics::quadrature::normalize_breakpoints;
use crate::numerics::special::SQRT_2PI;
use crate::numerics::{integrate_pieces, pairwise_sum, seeded_stream, QuadratureConfig};
use crate::prior::{ProductPrior, ScalarPrior};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    PosteriorQuadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub method: OracleMethod,
    pub samples: usize,
    pub seed: u64,
    pub quad: QuadratureConfig,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { method: OracleMethod::PosteriorQuadrature, samples: 100_000, seed: 0, quad: QuadratureConfig::default() }
    }
}

/// Smallest Monte Carlo sample size accepted.
pub const MIN_MC_SAMPLES: usize = 10_000;

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.method == OracleMethod::MonteCarlo && self.samples < MIN_MC_SAMPLES {
            return Err(Error::Invalid(format!("Monte Carlo needs at least {MIN_MC_SAMPLES} samples")));
        }
        self.quad.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmseEstimate {
    pub value: f64,
    /// Monte Carlo standard error; zero for quadrature.
    pub standard_error: f64,
    /// Set when the standard error exceeds 1% of the value.
    pub flagged: bool,
}

/// Posterior of `X` given `Y = y`, evaluated in a numerically scaled form.
pub(crate) struct Posterior<'a> {
    prior: &'a ScalarPrior,
    eta: f64,
    window: f64,
    atoms: Vec<(f64, f64)>,
    support: Option<(f64, f64)>,
    breaks: Vec<f64>,
    cfg: &'a QuadratureConfig,
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    /// `p(y)`, the observation density.
    marginal: f64,
    mean: f64,
    var: f64,
}

impl<'a> Posterior<'a> {
    pub(crate) fn new(prior: &'a ScalarPrior, ch: &AwgnChannel, cfg: &'a QuadratureConfig) -> Self {
        Self {
            prior,
            eta: ch.eta(),
            window: cfg.domain_margin_sigmas * ch.sigma(),
            atoms: prior.atoms(),
            support: prior.continuous_support(),
            breaks: prior.density_breakpoints(),
            cfg,
        }
    }

    /// Squared distance from `y` to the nearest support point; every weight
    /// is scaled by `exp(d²/2η)` so the posterior never underflows.
    fn offset(&self, y: f64) -> f64 {
        let mut d = f64::INFINITY;
        if let Some((lo, hi)) = self.support {
            d = if y < lo { lo - y } else if y > hi { y - hi } else { 0.0 };
        }
        for &(a, _) in &self.atoms {
            d = d.min((y - a).abs());
        }
        d * d
    }

    fn moments(&self, y: f64) -> Result<Moments> {
        self.moments_with(y, true)
    }

    /// `E[X | Y = y]`.
    pub(crate) fn mean(&self, y: f64) -> Result<f64> {
        Ok(self.moments_with(y, false)?.mean)
    }

    fn moments_with(&self, y: f64, with_var: bool) -> Result<Moments> {
        let d2 = self.offset(y);
        let kernel = |x: f64| (-((y - x) * (y - x) - d2) / (2.0 * self.eta)).exp();
        let mut window = None;
        if let Some((lo, hi)) = self.support {
            let (a, b) = (lo.max(y - self.window), hi.min(y + self.window));
            if a < b {
                let mut pts = self.breaks.clone();
                // The kernel peak is only a hint; next to a density jump it
                // would be merged in place of the jump.
                let near = 1e-9 * (b - a).max(1.0);
                if pts.iter().all(|p| (p - y).abs() > near) {
                    pts.push(y);
                }
                normalize_breakpoints(&mut pts, a, b);
                window = Some(pts);
            }
        }
        let integrate = |g: &dyn Fn(f64) -> f64| -> Result<f64> {
            match &window {
                Some(pts) => Ok(integrate_pieces(|x| self.prior.density_at(x) * kernel(x) * g(x), pts, self.cfg)?.value),
                None => Ok(0.0),
            }
        };
        let atom_sum = |g: &dyn Fn(f64) -> f64| -> f64 { self.atoms.iter().map(|&(a, p)| p * kernel(a) * g(a)).sum() };

        let z = integrate(&|_| 1.0)? + atom_sum(&|_| 1.0);
        if !(z > 0.0) {
            return Ok(Moments { marginal: 0.0, mean: y, var: 0.0 });
        }
        let mean = (integrate(&|x| x)? + atom_sum(&|x| x)) / z;
        let var = if with_var {
            (integrate(&|x| (x - mean) * (x - mean))? + atom_sum(&|x| (x - mean) * (x - mean))) / z
        } else {
            0.0
        };
        let marginal = z * (-d2 / (2.0 * self.eta)).exp() / (SQRT_2PI * self.eta.sqrt());
        Ok(Moments { marginal, mean, var: var.max(0.0) })
    }
}

/// `E[(X − E[X|Y])²]`.
pub fn mmse(prior: &ScalarPrior, ch: &AwgnChannel, cfg: &OracleConfig) -> Result<MmseEstimate> {
    cfg.validate()?;
    match cfg.method {
        OracleMethod::PosteriorQuadrature => mmse_quadrature(prior, ch, &cfg.quad),
        OracleMethod::MonteCarlo => mmse_monte_carlo(prior, ch, cfg),
    }
}

fn mmse_quadrature(prior: &ScalarPrior, ch: &AwgnChannel, cfg: &QuadratureConfig) -> Result<MmseEstimate> {
    let post = Posterior::new(prior, ch, cfg);
    let (lo, hi) = prior.support();
    let s = ch.sigma();
    let (y_lo, y_hi) = (lo - 10.0 * s, hi + 10.0 * s);
    let mut pts: Vec<f64> = Vec::new();
    let mut anchors = prior.density_breakpoints();
    anchors.extend(prior.atoms().iter().map(|a| a.0));
    anchors.extend([lo, hi]);
    for a in anchors {
        for k in [-3.0, -1.0, 0.0, 1.0, 3.0] {
            pts.push(a + k * s);
        }
    }
    // Posterior evaluation errors are rare and deterministic; the first is kept.
    let failure = std::sync::Mutex::new(None);
    let integrand = |y: f64| match post.moments(y) {
        Ok(m) => m.marginal * m.var,
        Err(e) => {
            failure.lock().expect("poisoned").get_or_insert(e);
            0.0
        }
    };
    normalize_breakpoints(&mut pts, y_lo, y_hi);
    let q = integrate_pieces(integrand, &pts, cfg)?;
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(MmseEstimate { value: q.value.max(0.0), standard_error: 0.0, flagged: false })
}

const MC_CHUNK: usize = 4096;

fn mmse_monte_carlo(prior: &ScalarPrior, ch: &AwgnChannel, cfg: &OracleConfig) -> Result<MmseEstimate> {
    // Sampling error dominates; the inner posterior mean need not be tighter.
    let inner = QuadratureConfig { abs_tol: cfg.quad.abs_tol.max(1e-10), rel_tol: cfg.quad.rel_tol.max(1e-8), ..cfg.quad };
    let post = Posterior::new(prior, ch, &inner);
    let n = cfg.samples;
    let chunks = n.div_ceil(MC_CHUNK);
    let partial: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeded_stream(cfg.seed, k as u64);
            let len = MC_CHUNK.min(n - k * MC_CHUNK);
            let mut sq = Vec::with_capacity(len);
            for _ in 0..len {
                let x = prior.sample(&mut rng);
                let y = ch.sample(x, &mut rng);
                let m = post.mean(y)?;
                sq.push((x - m) * (x - m));
            }
            let s1 = pairwise_sum(&sq);
            let s2 = pairwise_sum(&sq.iter().map(|v| v * v).collect::<Vec<_>>());
            Ok((s1, s2))
        })
        .collect();
    let partial: Vec<(f64, f64)> = partial.into_iter().collect::<Result<_>>()?;
    let s1 = pairwise_sum(&partial.iter().map(|p| p.0).collect::<Vec<_>>());
    let s2 = pairwise_sum(&partial.iter().map(|p| p.1).collect::<Vec<_>>());
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    let se = (var / nf).sqrt();
    Ok(MmseEstimate { value: mean, standard_error: se, flagged: se > 0.01 * mean })
}

/// `1 / J(X)`.
pub fn crb_high_noise(prior: &ScalarPrior, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(1.0 / prior.fisher_information(cfg)?)
}

/// `d² / (J(X) + d/η)` with `J` the summed per-component Fisher information.
pub fn crb_gaussian_channel(prior: &ProductPrior, eta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let ch = AwgnChannel::new(eta)?;
    let d = prior.dimension() as f64;
    let j: f64 = prior.components().iter().map(|c| c.fisher_information(cfg)).sum::<Result<f64>>()?;
    Ok(d * d / (j + d / ch.eta()))
}

/// `e^{2h(X)} / (2πe)`.
pub fn meb(prior: &ScalarPrior, cfg: &QuadratureConfig) -> Result<f64> {
    let h = prior.differential_entropy(cfg)?;
    Ok((2.0 * h).exp() / (2.0 * std::f64::consts::PI * std::f64::consts::E))
}

/// `Var(X)`, the high-noise limit of the MMSE.
pub fn variance(prior: &ScalarPrior) -> f64 {
    prior.mean_variance().1
}

//! `h_M` curves and the Ziv-Zakai bound family built from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotic::critical_offsets;
use crate::channel::AwgnChannel;
use crate::detect::{check_args, h_continuous, h_discrete};
use crate::error::{Error, Result};
use crate::numerics::search::golden_section_max;
use crate::numerics::{GridSpec, QuadratureConfig, SearchConfig, Spacing};
use crate::prior::{ProductPrior, ScalarPrior};

/// Which member of the bound family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ZzValley,
    ZzPlain,
    ZzSinglePoint,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::ZzValley => "zz_valley",
            Family::ZzPlain => "zz_plain",
            Family::ZzSinglePoint => "zz_single_point",
        }
    }
}

/// Sampled normalized curve `g(t) = h_M(t) / (M − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub grid: GridSpec,
    /// Grid abscissae, strictly increasing.
    pub points: Vec<f64>,
    /// Continuous-part `g` at each grid point.
    pub values: Vec<f64>,
    /// `(t, g)` at critical offsets, including the atoms' share.
    pub spike_atoms: Vec<(f64, f64)>,
    /// Continuous-part `g` at each spike location.
    pub spike_continuous: Vec<f64>,
    /// Limit of the continuous part as `t → 0⁺`.
    pub g0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub tail_flag: bool,
    pub grid_used: GridSpec,
    pub argmax_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub value: f64,
    pub family: Family,
    pub m: usize,
    pub per_axis: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// Tuning shared by every bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundOptions {
    /// Grid size used when the caller does not pass a grid.
    pub n_points: usize,
    pub search: SearchConfig,
    pub quad: QuadratureConfig,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self { n_points: 1024, search: SearchConfig::default(), quad: QuadratureConfig::default() }
    }
}

/// Sample of the merged grid-plus-spike set.
#[derive(Debug, Clone, Copy)]
struct Sample {
    t: f64,
    /// Continuous part.
    c: f64,
    /// Full value (continuous plus atoms); equals `c` off the spikes.
    s: f64,
}

impl BoundCurve {
    /// Builds a curve from evaluators of the continuous part and of the
    /// atoms' share. Grid points run in parallel; results keep grid order.
    pub(crate) fn evaluate<C, D>(grid: &GridSpec, g0: f64, cont: C, disc: D) -> Result<Self>
    where
        C: Fn(f64) -> Result<f64> + Sync,
        D: Fn(f64) -> Result<f64> + Sync,
    {
        grid.validate()?;
        let points = grid.points();
        let atoms = grid.atoms();
        let values = collect_in_order(points.par_iter().map(|&t| cont(t)).collect())?;
        let spikes = collect_in_order(
            atoms
                .par_iter()
                .map(|&t| {
                    let c = cont(t)?;
                    Ok((c, c + disc(t)?))
                })
                .collect(),
        )?;
        Ok(Self {
            grid: grid.clone(),
            points,
            values,
            spike_atoms: atoms.iter().zip(&spikes).map(|(t, v)| (*t, v.1)).collect(),
            spike_continuous: spikes.iter().map(|v| v.0).collect(),
            g0,
        })
    }

    fn merged(&self) -> Vec<Sample> {
        let mut v: Vec<Sample> = self.points.iter().zip(&self.values).map(|(&t, &c)| Sample { t, c, s: c }).collect();
        for ((t, s), c) in self.spike_atoms.iter().zip(&self.spike_continuous) {
            v.push(Sample { t: *t, c: *c, s: *s });
        }
        v.sort_by(|a, b| a.t.total_cmp(&b.t));
        let scale = self.grid.t_max;
        let mut out: Vec<Sample> = Vec::with_capacity(v.len());
        for x in v {
            match out.last_mut() {
                Some(last) if (x.t - last.t).abs() <= 1e-12 * scale => {
                    last.s = last.s.max(x.s);
                }
                _ => out.push(x),
            }
        }
        out
    }

    /// `g` at the last grid point.
    pub fn tail_value(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }

    /// `∫ (t/2) g(t) dt` with spikes carrying no weight.
    pub fn plain_integral(&self) -> f64 {
        let s = self.merged();
        let mut parts = Vec::with_capacity(s.len());
        let (mut a, mut l) = (0.0, self.g0);
        for x in &s {
            parts.push(half_t_linear(a, x.t, l, x.c));
            a = x.t;
            l = x.c;
        }
        crate::numerics::pairwise_sum(&parts)
    }

    /// `∫ (t/2) sup_{u ≥ t} g(u) dt` with spikes included in the supremum.
    pub fn valley_integral(&self) -> f64 {
        let s = self.merged();
        // Suffix maximum of the point values; nothing survives past t_max.
        let mut tail = vec![0.0f64; s.len() + 1];
        for i in (0..s.len()).rev() {
            tail[i] = tail[i + 1].max(s[i].s).max(s[i].c);
        }
        let mut parts = Vec::with_capacity(s.len());
        let (mut a, mut l) = (0.0, self.g0);
        for (i, x) in s.iter().enumerate() {
            // Between samples the continuous part is linear from l to x.c and
            // everything to the right is at least tail[i].
            parts.push(half_t_max_linear_const(a, x.t, l, x.c, tail[i]));
            a = x.t;
            l = x.c;
        }
        crate::numerics::pairwise_sum(&parts)
    }

    /// Best `t² g(t) / 2` over the samples: `(t, value, is_spike)`.
    fn best_single_point(&self) -> (usize, f64, f64, bool) {
        let mut best = (0, 0.0, 0.0, false);
        for (i, (&t, &g)) in self.points.iter().zip(&self.values).enumerate() {
            let v = 0.5 * t * t * g;
            if v > best.2 {
                best = (i, t, v, false);
            }
        }
        for &(t, g) in &self.spike_atoms {
            let v = 0.5 * t * t * g;
            if v > best.2 {
                best = (usize::MAX, t, v, true);
            }
        }
        best
    }
}

fn collect_in_order<T>(v: Vec<Result<T>>) -> Result<Vec<T>> {
    v.into_iter().collect()
}

/// `∫_a^b (t/2) ℓ(t) dt` for `ℓ` linear from `l` at `a` to `r` at `b`.
fn half_t_linear(a: f64, b: f64, l: f64, r: f64) -> f64 {
    (b - a) * (l * (2.0 * a + b) + r * (a + 2.0 * b)) / 12.0
}

/// `∫_a^b (t/2) max(ℓ(t), k) dt`.
fn half_t_max_linear_const(a: f64, b: f64, l: f64, r: f64, k: f64) -> f64 {
    if l <= k && r <= k {
        return half_t_linear(a, b, k, k);
    }
    if l >= k && r >= k {
        return half_t_linear(a, b, l, r);
    }
    let c = a + (b - a) * (k - l) / (r - l);
    if l > k {
        half_t_linear(a, c, l, k) + half_t_linear(c, b, k, k)
    } else {
        half_t_linear(a, c, k, k) + half_t_linear(c, b, k, r)
    }
}

/// Default separation grid for a prior: log-spaced near zero, linear out to
/// just beyond the prior's spread (past which `h_M` vanishes for every noise
/// level), with structural kinks and critical offsets included.
pub fn default_grid(prior: &ScalarPrior, eta: Option<f64>, m: usize, n_points: usize) -> GridSpec {
    let spread = prior.spread().max(f64::MIN_POSITIVE);
    let t_max = 1.01 * spread;
    let (_, var) = prior.mean_variance();
    let scale = (1.349 * var.sqrt()).min(0.5 * spread).max(1e-6 * spread);
    let t_min = 1e-3 * eta.map_or(scale, |e| scale.min(e.sqrt()));
    let mut kinks = Vec::new();
    if prior.is_piecewise_constant() {
        let b = prior.density_breakpoints();
        for x in &b {
            for y in &b {
                if x > y {
                    for k in 1..m {
                        kinks.push((x - y) / k as f64);
                    }
                }
            }
        }
    }
    GridSpec {
        t_max,
        n_points: n_points.max(8),
        spacing: Spacing::LogLinear { t_min, split: scale.min(0.5 * t_max) },
        extra_atoms: critical_offsets(prior, m),
        kinks,
    }
}

/// Samples `g(t) = h_M(t)/(M−1)` on `grid`, critical offsets spliced in.
pub fn h_curve(
    prior: &ScalarPrior,
    ch: &AwgnChannel,
    m: usize,
    grid: &GridSpec,
    cfg: &QuadratureConfig,
) -> Result<BoundCurve> {
    check_args(1.0, m)?;
    let mut grid = grid.clone();
    for t in critical_offsets(prior, m) {
        if !grid.extra_atoms.contains(&t) {
            grid.extra_atoms.push(t);
        }
    }
    let norm = (m - 1) as f64;
    BoundCurve::evaluate(
        &grid,
        prior.continuous_mass(),
        |t| Ok(h_continuous(prior, ch, t, m, cfg)? / norm),
        |t| Ok(h_discrete(prior, ch, t, m)? / norm),
    )
}

fn tail_flag(curve: &BoundCurve, cfg: &QuadratureConfig) -> bool {
    curve.tail_value() > 10.0 * cfg.abs_tol
}

/// Valley-filled (`valley = true`) or plain Ziv-Zakai bound.
pub fn zzb(
    prior: &ScalarPrior,
    ch: &AwgnChannel,
    m: usize,
    valley: bool,
    grid: &GridSpec,
    cfg: &QuadratureConfig,
) -> Result<BoundReport> {
    let curve = h_curve(prior, ch, m, grid, cfg)?;
    Ok(report_from_curve(&curve, m, if valley { Family::ZzValley } else { Family::ZzPlain }, cfg))
}

pub(crate) fn report_from_curve(curve: &BoundCurve, m: usize, family: Family, cfg: &QuadratureConfig) -> BoundReport {
    let value = match family {
        Family::ZzValley => curve.valley_integral(),
        _ => curve.plain_integral(),
    };
    BoundReport {
        value,
        family,
        m,
        per_axis: vec![value],
        diagnostics: Diagnostics { tail_flag: tail_flag(curve, cfg), grid_used: curve.grid.clone(), argmax_delta: None },
    }
}

/// Single-point bound `sup_Δ Δ² h_M(Δ) / (2(M − 1))`.
pub fn szzb(
    prior: &ScalarPrior,
    ch: &AwgnChannel,
    m: usize,
    search: &SearchConfig,
    cfg: &QuadratureConfig,
) -> Result<BoundReport> {
    search.validate()?;
    let mut grid = default_grid(prior, Some(ch.eta()), m, search.coarse_points);
    if let Some(d) = search.delta_max {
        grid.t_max = d;
        if let Spacing::LogLinear { t_min, split } = grid.spacing {
            grid.spacing = Spacing::LogLinear { t_min: t_min.min(0.25 * d), split: split.min(0.5 * d) };
        }
    }
    let norm = (m - 1) as f64;
    let curve = h_curve(prior, ch, m, &grid, cfg)?;
    single_point_from_curve(&curve, m, search, cfg, |t| Ok(h_continuous(prior, ch, t, m, cfg)? / norm))
}

pub(crate) fn single_point_from_curve<C>(
    curve: &BoundCurve,
    m: usize,
    search: &SearchConfig,
    cfg: &QuadratureConfig,
    cont: C,
) -> Result<BoundReport>
where
    C: Fn(f64) -> Result<f64>,
{
    let (idx, mut arg, mut best, spike) = curve.best_single_point();
    if !spike && best > 0.0 {
        let a = if idx == 0 { curve.points[0] * 0.5 } else { curve.points[idx - 1] };
        let b = curve.points[(idx + 1).min(curve.points.len() - 1)];
        if b > a {
            let mut f = |t: f64| cont(t).map(|g| 0.5 * t * t * g);
            let polished = golden_section_max(&mut f, a, b, search.refine_tol)?;
            if polished.max > best {
                best = polished.max;
                arg = polished.argmax;
            }
        }
    }
    Ok(BoundReport {
        value: best,
        family: Family::ZzSinglePoint,
        m,
        per_axis: vec![best],
        diagnostics: Diagnostics {
            tail_flag: tail_flag(curve, cfg),
            grid_used: curve.grid.clone(),
            argmax_delta: (best > 0.0).then_some(arg),
        },
    })
}

/// Any family on a scalar prior with the default grid.
pub fn bound(prior: &ScalarPrior, ch: &AwgnChannel, m: usize, family: Family, opts: &BoundOptions) -> Result<BoundReport> {
    match family {
        Family::ZzSinglePoint => {
            let search = SearchConfig { coarse_points: opts.n_points.max(opts.search.coarse_points), ..opts.search };
            szzb(prior, ch, m, &search, &opts.quad)
        }
        _ => {
            let grid = default_grid(prior, Some(ch.eta()), m, opts.n_points);
            zzb(prior, ch, m, family == Family::ZzValley, &grid, &opts.quad)
        }
    }
}

/// Sum of per-component scalar bounds for independent components.
pub fn zzb_product(
    prior: &ProductPrior,
    ch: &AwgnChannel,
    m: usize,
    family: Family,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let reports: Vec<BoundReport> =
        prior.components().iter().map(|c| bound(c, ch, m, family, opts)).collect::<Result<_>>()?;
    combine(reports, family, m)
}

pub(crate) fn combine(reports: Vec<BoundReport>, family: Family, m: usize) -> Result<BoundReport> {
    let first = reports.first().ok_or_else(|| Error::Contract("no components".into()))?;
    let per_axis: Vec<f64> = reports.iter().map(|r| r.value).collect();
    Ok(BoundReport {
        value: per_axis.iter().sum(),
        family,
        m,
        diagnostics: Diagnostics {
            tail_flag: reports.iter().any(|r| r.diagnostics.tail_flag),
            grid_used: first.diagnostics.grid_used.clone(),
            argmax_delta: first.diagnostics.argmax_delta,
        },
        per_axis,
    })
}

//! Channel-free high-noise limits, critical offsets of atomic priors,
//! low-noise slope targets, and the constant `γ = 4 sup t² Q(t)`.

use std::sync::OnceLock;

use crate::detect::{aligned_atom_groups, check_args, shifted_breakpoints};
use crate::error::{Error, Result};
use crate::numerics::quadrature::normalize_breakpoints;
use crate::numerics::special::q;
use crate::numerics::{integrate_pieces, maximize_1d, pairwise_sum, GridSpec, QuadratureConfig, SearchConfig};
use crate::prior::{ProductPrior, ScalarPrior};
use crate::zz::{single_point_from_curve, BoundCurve, Family};

/// Positive offsets at which shifted copies of the atom set can overlap:
/// `(x_w − x_z)/(ℓ − k)` for `0 ≤ k < ℓ ≤ M − 1`.
pub fn critical_offsets(prior: &ScalarPrior, m: usize) -> Vec<f64> {
    let atoms: Vec<f64> = prior.atoms().into_iter().map(|a| a.0).collect();
    let mut out = Vec::new();
    for &xw in &atoms {
        for &xz in &atoms {
            if xw > xz {
                for d in 1..m {
                    out.push((xw - xz) / d as f64);
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    let tol = crate::detect::alignment_tol(prior);
    out.dedup_by(|a, b| (*a - *b).abs() <= tol);
    out
}

/// `M − H_M(t)`, split into the continuous and atomic contributions.
fn deficit_parts(prior: &ScalarPrior, t: f64, m: usize, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    check_args(t, m)?;
    let cont = match prior.continuous_support() {
        None => 0.0,
        Some((lo, hi)) => {
            let x_lo = lo - (m - 1) as f64 * t;
            let mut pts = shifted_breakpoints(prior, t, m, x_lo, hi);
            if !prior.is_piecewise_constant() {
                pts.extend(argmax_switches(prior, t, m, x_lo, hi));
                normalize_breakpoints(&mut pts, x_lo, hi);
            }
            let integrand = |x: f64| {
                let mut sum = 0.0;
                let mut max = 0.0f64;
                for j in 0..m {
                    let f = prior.density_at(x + j as f64 * t);
                    sum += f;
                    max = max.max(f);
                }
                sum - max
            };
            if prior.is_piecewise_constant() {
                // Constant between shifted breakpoints: exact, and immune to
                // near-coincident breakpoints once many copies overlap.
                let cells: Vec<f64> = pts.windows(2).map(|w| (w[1] - w[0]) * integrand(0.5 * (w[0] + w[1]))).collect();
                pairwise_sum(&cells)
            } else {
                integrate_pieces(integrand, &pts, cfg)?.value
            }
        }
    };
    let disc = aligned_atom_groups(prior, t, m)
        .iter()
        .map(|w| w.iter().sum::<f64>() - w.iter().cloned().fold(0.0, f64::max))
        .sum();
    Ok((cont, disc))
}

/// Locations where `argmax_j f(x + jt)` changes, bracketed on a scan and
/// bisected.
fn argmax_switches(prior: &ScalarPrior, t: f64, m: usize, lo: f64, hi: f64) -> Vec<f64> {
    let arg = |x: f64| {
        (0..m)
            .map(|j| (j, prior.log_density_at(x + j as f64 * t)))
            .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
            .0
    };
    const SCAN: usize = 512;
    let mut out = Vec::new();
    let mut prev_x = lo;
    let mut prev = arg(lo);
    for i in 1..=SCAN {
        let x = lo + (hi - lo) * i as f64 / SCAN as f64;
        let cur = arg(x);
        if cur != prev {
            let (mut a, mut b) = (prev_x, x);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if arg(mid) == prev {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev_x = x;
        prev = cur;
    }
    out
}

/// `H_M(t) = ∫ max_j f(x + jt) dx + Σ_v max_j p(v + jt)`.
pub fn high_noise_h(prior: &ScalarPrior, t: f64, m: usize, cfg: &QuadratureConfig) -> Result<f64> {
    let (c, d) = deficit_parts(prior, t, m, cfg)?;
    Ok(m as f64 - c - d)
}

/// High-noise counterpart of [`BoundCurve`], storing `H` rather than `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct HighNoiseCurve {
    pub grid: GridSpec,
    pub points: Vec<f64>,
    pub h_values: Vec<f64>,
    pub spike_atoms: Vec<(f64, f64)>,
}

/// The three high-noise bounds and their diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct HighNoiseBounds {
    pub v_bar: f64,
    pub v: f64,
    pub v_sp: f64,
    pub argmax_delta: Option<f64>,
    pub tail_flag: bool,
}

impl HighNoiseBounds {
    pub fn get(&self, family: Family) -> f64 {
        match family {
            Family::ZzValley => self.v_bar,
            Family::ZzPlain => self.v,
            Family::ZzSinglePoint => self.v_sp,
        }
    }
}

fn normalized_curve(prior: &ScalarPrior, m: usize, grid: &GridSpec, cfg: &QuadratureConfig) -> Result<BoundCurve> {
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
        |t| Ok(deficit_parts(prior, t, m, cfg)?.0 / norm),
        |t| {
            let w = aligned_atom_groups(prior, t, m);
            Ok(w.iter().map(|w| w.iter().sum::<f64>() - w.iter().cloned().fold(0.0, f64::max)).sum::<f64>() / norm)
        },
    )
}

/// Samples `H_M` on `grid` with critical offsets spliced in.
pub fn high_noise_curve(prior: &ScalarPrior, m: usize, grid: &GridSpec, cfg: &QuadratureConfig) -> Result<HighNoiseCurve> {
    check_args(1.0, m)?;
    let c = normalized_curve(prior, m, grid, cfg)?;
    let norm = (m - 1) as f64;
    let h = |g: f64| m as f64 - norm * g;
    Ok(HighNoiseCurve {
        grid: c.grid.clone(),
        points: c.points.clone(),
        h_values: c.values.iter().map(|g| h(*g)).collect(),
        spike_atoms: c.spike_atoms.iter().map(|(t, g)| (*t, h(*g))).collect(),
    })
}

/// `(V̄, V, V_sp)` from `(M − H_M)/(M − 1)`.
pub fn high_noise_bounds(
    prior: &ScalarPrior,
    m: usize,
    grid: &GridSpec,
    search: &SearchConfig,
    cfg: &QuadratureConfig,
) -> Result<HighNoiseBounds> {
    check_args(1.0, m)?;
    let curve = normalized_curve(prior, m, grid, cfg)?;
    let norm = (m - 1) as f64;
    let sp = single_point_from_curve(&curve, m, search, cfg, |t| Ok(deficit_parts(prior, t, m, cfg)?.0 / norm))?;
    Ok(HighNoiseBounds {
        v_bar: curve.valley_integral(),
        v: curve.plain_integral(),
        v_sp: sp.value,
        argmax_delta: sp.diagnostics.argmax_delta,
        tail_flag: sp.diagnostics.tail_flag,
    })
}

/// `α d`, the limit of `ZZ(η)/η` as `η → 0`.
pub fn low_noise_slope_target(prior: &ProductPrior) -> Result<f64> {
    let (alpha, d) = prior.mixture_decomposition()?;
    Ok(alpha * d as f64)
}

/// `γ = 4 sup_{t>0} t² Q(t)`, computed once.
pub fn gamma_constant() -> f64 {
    static GAMMA: OnceLock<f64> = OnceLock::new();
    *GAMMA.get_or_init(|| {
        let cfg = SearchConfig { coarse_points: 1024, refine_tol: 1e-12, delta_max: None };
        let m = maximize_1d(|t| Ok::<_, Error>(t * t * q(t)), 1e-6, 10.0, &cfg).expect("finite objective");
        4.0 * m.max
    })
}

//! Adaptive Simpson quadrature with breakpoint seeding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Recursion cap for a single seeded piece.
pub const MAX_DEPTH: u32 = 15;

const NUDGE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// How many noise standard deviations beyond the support an observation
    /// integral extends.
    pub domain_margin_sigmas: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-10,
            max_subdivisions: 1 << 20,
            domain_margin_sigmas: 12.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Invalid(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Invalid(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::Invalid("max_subdivisions must be at least 1".into()));
        }
        if !(self.domain_margin_sigmas > 0.0 && self.domain_margin_sigmas.is_finite()) {
            return Err(Error::Invalid("domain_margin_sigmas must be positive".into()));
        }
        Ok(())
    }
}

/// Result of a quadrature call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// `∫_a^b f` by adaptive Simpson.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_pieces(f, &[a, b], cfg).map(|q| q.value)
}

/// Integrates `f` over `[points[0], points[last]]`, treating every interior
/// point as a breakpoint where `f` may have a kink or jump.
///
/// `points` must be sorted; duplicates are ignored. Each piece is further
/// pre-split into a few cells so that narrow features are sampled.
pub fn integrate_pieces<F>(f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    if points.len() < 2 {
        return Err(Error::Contract("integration needs at least two points".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Contract("integration limits must be finite".into()));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Contract("integration breakpoints must be sorted".into()));
    }
    let (a, b) = (points[0], points[points.len() - 1]);
    if !(a < b) {
        return Err(Error::Contract(format!("integration needs a < b, got [{a}, {b}]")));
    }

    // Initial cells: pieces between distinct breakpoints, each cut in four.
    let mut cells = Vec::new();
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= f64::EPSILON * (lo.abs() + hi.abs()) {
            continue;
        }
        const SPLIT: usize = 4;
        let h = (hi - lo) / SPLIT as f64;
        for k in 0..SPLIT {
            let x0 = lo + k as f64 * h;
            let x1 = if k + 1 == SPLIT { hi } else { lo + (k + 1) as f64 * h };
            // Piece ends are sampled just inside so a jump sitting on a
            // breakpoint is read from the correct side.
            let e0 = if k == 0 { lo + NUDGE * (hi - lo) } else { x0 };
            let e1 = if k + 1 == SPLIT { hi - NUDGE * (hi - lo) } else { x1 };
            cells.push((x0, x1, e0, e1));
        }
    }

    let mut evals = 0usize;
    let mut eval = |x: f64| {
        evals += 1;
        f(x)
    };

    // Coarse pass fixes the tolerance scale.
    let mut seeds = Vec::with_capacity(cells.len());
    let mut coarse = 0.0;
    for &(lo, hi, e0, e1) in &cells {
        let mid = 0.5 * (lo + hi);
        let (fa, fm, fb) = (eval(e0), eval(mid), eval(e1));
        let s = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        coarse += s;
        seeds.push(Cell { lo, hi, fa, fm, fb, whole: s });
    }
    let tol = cfg.abs_tol.max(cfg.rel_tol * coarse.abs());
    let width = b - a;

    let mut state = Budget { used: cells.len(), limit: cfg.max_subdivisions.max(cells.len()) };
    let mut total = 0.0;
    let mut err = 0.0;
    let mut exhausted = false;
    for c in seeds {
        let cell_tol = tol * (c.hi - c.lo) / width;
        let (v, e, ok) = simpson_recurse(&mut eval, c, cell_tol, 0, &mut state);
        total += v;
        err += e;
        exhausted |= !ok;
    }

    if exhausted || !total.is_finite() {
        return Err(Error::Convergence { partial: total, error_estimate: err });
    }
    let final_tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
    // Depth-capped cells are accepted locally; the summed estimate is the gate.
    if err > 4.0 * final_tol {
        return Err(Error::Convergence { partial: total, error_estimate: err });
    }
    Ok(Quadrature { value: total, error_estimate: err, evaluations: evals })
}

#[derive(Clone, Copy)]
struct Cell {
    lo: f64,
    hi: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

struct Budget {
    used: usize,
    limit: usize,
}

fn simpson_recurse<E>(eval: &mut E, c: Cell, tol: f64, depth: u32, budget: &mut Budget) -> (f64, f64, bool)
where
    E: FnMut(f64) -> f64,
{
    let mid = 0.5 * (c.lo + c.hi);
    let lm = 0.5 * (c.lo + mid);
    let rm = 0.5 * (mid + c.hi);
    let flm = eval(lm);
    let frm = eval(rm);
    let h = c.hi - c.lo;
    let left = h / 12.0 * (c.fa + 4.0 * flm + c.fm);
    let right = h / 12.0 * (c.fm + 4.0 * frm + c.fb);
    let both = left + right;
    let delta = both - c.whole;

    if delta.abs() <= 15.0 * tol || depth >= MAX_DEPTH {
        return (both + delta / 15.0, delta.abs() / 15.0, true);
    }
    if budget.used >= budget.limit {
        return (both + delta / 15.0, delta.abs() / 15.0, false);
    }
    budget.used += 1;

    let l = Cell { lo: c.lo, hi: mid, fa: c.fa, fm: flm, fb: c.fm, whole: left };
    let r = Cell { lo: mid, hi: c.hi, fa: c.fm, fm: frm, fb: c.fb, whole: right };
    let (lv, le, lok) = simpson_recurse(eval, l, 0.5 * tol, depth + 1, budget);
    let (rv, re, rok) = simpson_recurse(eval, r, 0.5 * tol, depth + 1, budget);
    (lv + rv, le + re, lok && rok)
}

/// Pairwise (cascade) summation; fixed reduction order for a given length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sorts, removes NaNs, and merges points closer than `eps` (relative to scale).
pub fn normalize_breakpoints(points: &mut Vec<f64>, lo: f64, hi: f64) {
    points.retain(|p| p.is_finite() && *p >= lo && *p <= hi);
    points.push(lo);
    points.push(hi);
    points.sort_by(f64::total_cmp);
    let scale = (hi - lo).abs().max(1e-300);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * scale);
    if let Some(last) = points.last_mut() {
        *last = hi;
    }
    points[0] = lo;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::{phi_pdf, q};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn polynomial_exactness() {
        let v = integrate_1d(|x| x, 0.0, 1.0, &cfg()).unwrap();
        assert!((v - 0.5).abs() < 1e-13);
        let v = integrate_1d(|x| x * x * x, -1.0, 2.0, &cfg()).unwrap();
        assert!((v - 3.75).abs() < 1e-11);
    }

    #[test]
    fn gaussian_normalization() {
        let v = integrate_1d(phi_pdf, -8.0, 8.0, &cfg()).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn x_times_q() {
        // ∫_0^∞ u Q(u) du = 1/4; by 40 the tail is below 1e-300.
        let v = integrate_1d(|x| x * q(x), 0.0, 40.0, &cfg()).unwrap();
        assert!((v - 0.25).abs() < 1e-6, "{v}");
        // independent midpoint Riemann sum with 1e6 cells on [0, 12]
        let n = 1_000_000;
        let h = 12.0 / n as f64;
        let riemann: f64 = (0..n).map(|i| {
            let x = (i as f64 + 0.5) * h;
            x * q(x) * h
        }).sum();
        assert!((v - riemann).abs() < 1e-8);
    }

    #[test]
    fn breakpoints_resolve_jumps() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 3.0 };
        let q = integrate_pieces(step, &[0.0, 0.3, 1.0], &cfg()).unwrap();
        assert!((q.value - (0.3 + 2.1)).abs() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_reports_partial() {
        let tight = QuadratureConfig { abs_tol: 1e-300, rel_tol: 1e-300, max_subdivisions: 3, ..cfg() };
        match integrate_1d(|x| x.sin().exp(), 0.0, 10.0, &tight) {
            Err(Error::Convergence { partial, .. }) => assert!(partial.is_finite() && partial > 0.0),
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_limits() {
        assert!(matches!(integrate_1d(|x| x, 1.0, 1.0, &cfg()), Err(Error::Contract(_))));
        assert!(matches!(integrate_pieces(|x| x, &[0.0, 2.0, 1.0], &cfg()), Err(Error::Contract(_))));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sqrt()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-9);
    }

    #[test]
    fn normalize_breakpoints_clips_and_dedups() {
        let mut p = vec![0.5, f64::NAN, -3.0, 0.5, 0.25, 7.0];
        normalize_breakpoints(&mut p, 0.0, 1.0);
        assert_eq!(p, vec![0.0, 0.25, 0.5, 1.0]);
    }
}

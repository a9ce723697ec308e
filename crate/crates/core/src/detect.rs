//! M-ary MAP error probabilities and the integrated max-form behind `h_M`.

use crate::channel::AwgnChannel;
use crate::error::{Error, Result};
use crate::numerics::quadrature::normalize_breakpoints;
use crate::numerics::special::{phi_cdf, q};
use crate::numerics::{integrate_pieces, QuadratureConfig};
use crate::prior::ScalarPrior;

const PRIOR_SUM_TOL: f64 = 1e-12;

/// Hypotheses `H_k: X = anchor + u_k` with prior weights `priors[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSpec {
    anchor: f64,
    offsets: Vec<f64>,
    priors: Vec<f64>,
}

impl HypothesisSpec {
    pub fn new(anchor: f64, offsets: Vec<f64>, priors: Vec<f64>) -> Result<Self> {
        let m = offsets.len();
        if m < 2 || priors.len() != m {
            return Err(Error::Invalid("need M >= 2 offsets and as many priors".into()));
        }
        if !anchor.is_finite() || offsets.iter().any(|u| !u.is_finite()) {
            return Err(Error::Invalid("anchor and offsets must be finite".into()));
        }
        if offsets.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Invalid("offsets must be strictly increasing".into()));
        }
        let step = offsets[1] - offsets[0];
        if offsets.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0)) {
            return Err(Error::Invalid("offsets must be equispaced".into()));
        }
        if priors.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Invalid("priors must lie in [0, 1]".into()));
        }
        let s: f64 = priors.iter().sum();
        if (s - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::Invalid(format!("priors must sum to 1, got {s}")));
        }
        Ok(Self { anchor, offsets, priors })
    }

    /// Offsets `u_k = k t` for `k = 0..M`.
    pub fn equispaced(anchor: f64, t: f64, priors: Vec<f64>) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Invalid(format!("separation must be positive, got {t}")));
        }
        let offsets = (0..priors.len()).map(|k| k as f64 * t).collect();
        Self::new(anchor, offsets, priors)
    }

    pub fn m(&self) -> usize {
        self.offsets.len()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn centers(&self) -> Vec<f64> {
        self.offsets.iter().map(|u| self.anchor + u).collect()
    }
}

/// `Σ w_i − ∫ max_i w_i φ_η(y − c_i) dy` for nonnegative, possibly
/// unnormalized weights and strictly increasing centers.
///
/// The maximum is resolved exactly: in log space each hypothesis is a line
/// in `y`, the winner on each interval comes from the upper envelope, and the
/// lost mass is a sum of Gaussian tails. No difference of nearly equal
/// quantities is formed.
pub fn gaussian_map_error(weights: &[f64], centers: &[f64], eta: f64) -> f64 {
    let logs: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    gaussian_map_error_log(weights, &logs, centers, eta)
}

/// [`gaussian_map_error`] with caller-supplied `ln w_i`, which may be finite
/// even when `w_i` underflows.
pub fn gaussian_map_error_log(weights: &[f64], log_weights: &[f64], centers: &[f64], eta: f64) -> f64 {
    let sigma = eta.sqrt();
    let mut lost = 0.0;
    // Stack of hull members in centre order.
    let mut hull: Vec<usize> = Vec::with_capacity(weights.len());
    let switch = |a: usize, b: usize| -> f64 {
        0.5 * (centers[a] + centers[b]) + eta * (log_weights[a] - log_weights[b]) / (centers[b] - centers[a])
    };
    for i in 0..weights.len() {
        if !(weights[i] > 0.0) && log_weights[i] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let top = hull[hull.len() - 1];
            let below = hull[hull.len() - 2];
            if switch(below, i) <= switch(below, top) {
                hull.pop();
                lost += weights[top];
            } else {
                break;
            }
        }
        hull.push(i);
    }
    for (k, &i) in hull.iter().enumerate() {
        let lo = if k == 0 { f64::NEG_INFINITY } else { switch(hull[k - 1], i) };
        let hi = if k + 1 == hull.len() { f64::INFINITY } else { switch(i, hull[k + 1]) };
        let left = if lo == f64::NEG_INFINITY { 0.0 } else { phi_cdf((lo - centers[i]) / sigma) };
        let right = if hi == f64::INFINITY { 0.0 } else { q((hi - centers[i]) / sigma) };
        lost += weights[i] * (left + right);
    }
    lost
}

/// Minimum MAP error by quadrature of `1 − ∫ max_i p_i f(y | anchor + u_i) dy`,
/// seeded at the pairwise switch points.
pub fn bayes_error(ch: &AwgnChannel, hyp: &HypothesisSpec, cfg: &QuadratureConfig) -> Result<f64> {
    let c = hyp.centers();
    let p = &hyp.priors;
    let pmax = p.iter().cloned().fold(0.0, f64::max);
    if pmax >= 1.0 - PRIOR_SUM_TOL {
        return Ok(0.0);
    }
    let margin = cfg.domain_margin_sigmas * ch.sigma();
    let (lo, hi) = (c[0] - margin, c[c.len() - 1] + margin);
    let mut pts = Vec::new();
    for a in 0..c.len() {
        for b in a + 1..c.len() {
            if p[a] > 0.0 && p[b] > 0.0 {
                pts.push(0.5 * (c[a] + c[b]) + ch.eta() * (p[a] / p[b]).ln() / (c[b] - c[a]));
            }
        }
    }
    pts.extend(c.iter().copied());
    normalize_breakpoints(&mut pts, lo, hi);
    let integrand = |y: f64| {
        p.iter().zip(&c).map(|(pi, ci)| pi * ch.likelihood(y, *ci)).fold(0.0, f64::max)
    };
    let quad = match integrate_pieces(integrand, &pts, cfg) {
        Ok(q) => q.value,
        Err(Error::Convergence { partial, error_estimate }) => {
            return Err(Error::Convergence { partial: clamp_error(1.0 - partial, pmax), error_estimate })
        }
        Err(e) => return Err(e),
    };
    Ok(clamp_error(1.0 - quad, pmax))
}

/// Same quantity as [`bayes_error`] through the closed-form envelope.
pub fn bayes_error_envelope(ch: &AwgnChannel, hyp: &HypothesisSpec) -> f64 {
    let pmax = hyp.priors.iter().cloned().fold(0.0, f64::max);
    clamp_error(gaussian_map_error(&hyp.priors, &hyp.centers(), ch.eta()), pmax)
}

fn clamp_error(e: f64, pmax: f64) -> f64 {
    e.clamp(0.0, (1.0 - pmax).max(0.0))
}

/// MAP error for a finite observation alphabet: `likelihood[i][y]` is
/// `P(Y = y | H_i)`.
pub fn bayes_error_discrete(priors: &[f64], likelihood: &[Vec<f64>]) -> Result<f64> {
    if priors.len() != likelihood.len() || priors.is_empty() {
        return Err(Error::Invalid("need one likelihood row per hypothesis".into()));
    }
    let n_obs = likelihood[0].len();
    if likelihood.iter().any(|r| r.len() != n_obs) {
        return Err(Error::Invalid("likelihood rows must have equal length".into()));
    }
    let correct: f64 = (0..n_obs)
        .map(|y| priors.iter().zip(likelihood).map(|(p, row)| p * row[y]).fold(0.0, f64::max))
        .sum();
    Ok(1.0 - correct)
}

/// Alignment tolerance when testing whether two shifted atoms coincide.
pub(crate) fn alignment_tol(prior: &ScalarPrior) -> f64 {
    let (lo, hi) = prior.support();
    1e-9 * lo.abs().max(hi.abs()).max(1.0)
}

/// Groups of atoms that land on a common location `v` under the shifts
/// `v + jt`, `j = 0..m`. Each group is the length-`m` weight vector
/// `p(v + jt)`; only groups with at least two nonzero entries are returned.
pub fn aligned_atom_groups(prior: &ScalarPrior, t: f64, m: usize) -> Vec<Vec<f64>> {
    let atoms = prior.atoms();
    if atoms.len() < 2 {
        return Vec::new();
    }
    let tol = alignment_tol(prior);
    let mut cand: Vec<(f64, usize, f64)> = Vec::with_capacity(atoms.len() * m);
    for &(a, p) in &atoms {
        for j in 0..m {
            cand.push((a - j as f64 * t, j, p));
        }
    }
    cand.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut groups = Vec::new();
    let mut i = 0;
    while i < cand.len() {
        let mut k = i + 1;
        while k < cand.len() && cand[k].0 - cand[k - 1].0 <= tol {
            k += 1;
        }
        if k - i >= 2 {
            let mut w = vec![0.0f64; m];
            for c in &cand[i..k] {
                w[c.1] = w[c.1].max(c.2);
            }
            if w.iter().filter(|x| **x > 0.0).count() >= 2 {
                groups.push(w);
            }
        }
        i = k;
    }
    groups
}

/// Integration breakpoints for `x ↦ F(f(x), f(x+t), …, f(x+(m−1)t))` when
/// `f` is piecewise smooth.
pub(crate) fn shifted_breakpoints(prior: &ScalarPrior, t: f64, m: usize, lo: f64, hi: f64) -> Vec<f64> {
    let base = prior.density_breakpoints();
    let mut pts = Vec::with_capacity(base.len() * m);
    for b in base {
        for j in 0..m {
            pts.push(b - j as f64 * t);
        }
    }
    normalize_breakpoints(&mut pts, lo, hi);
    pts
}

/// `h_M(t)` of the absolutely continuous component (the atoms' share is
/// zero against it).
pub fn h_continuous(prior: &ScalarPrior, ch: &AwgnChannel, t: f64, m: usize, cfg: &QuadratureConfig) -> Result<f64> {
    check_args(t, m)?;
    let Some((lo, hi)) = prior.continuous_support() else {
        return Ok(0.0);
    };
    let x_lo = lo - (m - 1) as f64 * t;
    let pts = shifted_breakpoints(prior, t, m, x_lo, hi);
    let centers: Vec<f64> = (0..m).map(|j| j as f64 * t).collect();
    let eta = ch.eta();
    let integrand = |x: f64| {
        let mut w = [0.0f64; MAX_M];
        let mut lw = [f64::NEG_INFINITY; MAX_M];
        for j in 0..m {
            let xj = x + j as f64 * t;
            w[j] = prior.density_at(xj);
            lw[j] = if w[j] > 0.0 { prior.log_density_at(xj) } else { f64::NEG_INFINITY };
        }
        gaussian_map_error_log(&w[..m], &lw[..m], &centers, eta)
    };
    Ok(integrate_pieces(integrand, &pts, cfg)?.value)
}

/// `h_M(t)` contributed by atoms; nonzero only at critical offsets.
pub fn h_discrete(prior: &ScalarPrior, ch: &AwgnChannel, t: f64, m: usize) -> Result<f64> {
    check_args(t, m)?;
    let centers: Vec<f64> = (0..m).map(|j| j as f64 * t).collect();
    Ok(aligned_atom_groups(prior, t, m).iter().map(|w| gaussian_map_error(w, &centers, ch.eta())).sum())
}

/// `∫∫ max_j f(x + jt) f(y | x + jt) dy dx` plus the atom sums, i.e.
/// `M − h_M(t)`.
pub fn integrated_max_joint(
    prior: &ScalarPrior,
    ch: &AwgnChannel,
    t: f64,
    m: usize,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let h = h_continuous(prior, ch, t, m, cfg)? + h_discrete(prior, ch, t, m)?;
    Ok(m as f64 - h)
}

/// Largest supported hypothesis count.
pub const MAX_M: usize = 256;

pub(crate) fn check_args(t: f64, m: usize) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("separation must be positive and finite, got {t}")));
    }
    if !(2..=MAX_M).contains(&m) {
        return Err(Error::Invalid(format!("M must lie in [2, {MAX_M}], got {m}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_stream;
    use rand::Rng;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn binary_matches_closed_form() {
        let ch = AwgnChannel::new(1.0).unwrap();
        let hyp = HypothesisSpec::equispaced(0.0, 2.0, vec![0.5, 0.5]).unwrap();
        let e = bayes_error(&ch, &hyp, &cfg()).unwrap();
        assert!((e - 0.158_655_253_931_457).abs() < 1e-6);
        assert!((bayes_error_envelope(&ch, &hyp) - 0.158_655_253_931_457).abs() < 1e-12);
        for (p0, t, eta) in [(0.3, 1.0, 0.5), (0.1, 0.2, 3.0), (0.8, 4.0, 0.01)] {
            let ch = AwgnChannel::new(eta).unwrap();
            let hyp = HypothesisSpec::equispaced(1.3, t, vec![p0, 1.0 - p0]).unwrap();
            let exact = ch.binary_error_closed_form(t, p0).unwrap();
            assert!((bayes_error_envelope(&ch, &hyp) - exact).abs() < 1e-14);
            assert!((bayes_error(&ch, &hyp, &cfg()).unwrap() - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn degenerate_prior_never_errs() {
        let ch = AwgnChannel::new(2.0).unwrap();
        let hyp = HypothesisSpec::equispaced(0.0, 0.5, vec![0.0, 1.0, 0.0]).unwrap();
        assert!(bayes_error(&ch, &hyp, &cfg()).unwrap().abs() < 1e-9);
        assert!(bayes_error_envelope(&ch, &hyp).abs() < 1e-12);
    }

    #[test]
    fn ternary_against_simulation() {
        let ch = AwgnChannel::new(0.25).unwrap();
        let p = vec![1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0];
        let hyp = HypothesisSpec::equispaced(0.0, 1.0, p.clone()).unwrap();
        let c = hyp.centers();
        let n = 1_000_000;
        let mut rng = seeded_stream(2024, 0);
        let mut errors = 0usize;
        for _ in 0..n {
            let k = ((rng.gen::<f64>() * 3.0) as usize).min(2);
            let y = ch.sample(c[k], &mut rng);
            let decided = (0..3)
                .max_by(|&a, &b| (p[a] * ch.likelihood(y, c[a])).total_cmp(&(p[b] * ch.likelihood(y, c[b]))))
                .unwrap();
            errors += (decided != k) as usize;
        }
        let mc = errors as f64 / n as f64;
        let e = bayes_error(&ch, &hyp, &cfg()).unwrap();
        assert!((e - mc).abs() < 0.003, "{e} vs {mc}");
        assert!((e - bayes_error_envelope(&ch, &hyp)).abs() < 1e-8);
        // equal priors: (2(M-1)/M) Q(t / (2 sigma))
        assert!((e - 4.0 / 3.0 * q(1.0)).abs() < 1e-8);
    }

    #[test]
    fn envelope_matches_quadrature_for_skewed_priors() {
        let priors = [vec![0.1, 0.6, 0.05, 0.25], vec![0.7, 0.1, 0.1, 0.1], vec![0.01, 0.01, 0.01, 0.97]];
        for p in priors {
            for (t, eta) in [(0.3, 1.0), (1.0, 0.1), (2.0, 5.0)] {
                let ch = AwgnChannel::new(eta).unwrap();
                let hyp = HypothesisSpec::equispaced(-0.4, t, p.clone()).unwrap();
                let a = bayes_error(&ch, &hyp, &cfg()).unwrap();
                let b = bayes_error_envelope(&ch, &hyp);
                assert!((a - b).abs() < 1e-8, "{p:?} t={t} eta={eta}: {a} vs {b}");
                let pmax = p.iter().cloned().fold(0.0, f64::max);
                assert!(a >= 0.0 && a <= 1.0 - pmax);
            }
        }
    }

    #[test]
    fn bayes_error_monotone_in_eta() {
        let p = vec![0.2, 0.5, 0.3];
        let hyp = HypothesisSpec::equispaced(0.0, 1.0, p).unwrap();
        let mut prev = 0.0;
        for k in 0..30 {
            let eta = 10f64.powf(-2.0 + 0.15 * k as f64);
            let e = bayes_error(&AwgnChannel::new(eta).unwrap(), &hyp, &cfg()).unwrap();
            assert!(e >= prev - 1e-9);
            prev = e;
        }
    }

    #[test]
    fn discrete_channel_against_enumeration() {
        let priors = [0.5, 0.3, 0.2];
        let lik = vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.5, 0.3], vec![0.1, 0.2, 0.7]];
        let e = bayes_error_discrete(&priors, &lik).unwrap();
        let mut best = f64::INFINITY;
        // every deterministic rule maps each of 3 observations to one of 3 hypotheses
        for code in 0..27usize {
            let rule = [code % 3, (code / 3) % 3, code / 9];
            let mut err = 0.0;
            for (i, p) in priors.iter().enumerate() {
                for (y, dec) in rule.iter().enumerate() {
                    if *dec != i {
                        err += p * lik[i][y];
                    }
                }
            }
            best = f64::min(best, err);
        }
        assert!((e - best).abs() < 1e-15);
        assert!(bayes_error_discrete(&priors, &lik[..2]).is_err());
    }

    #[test]
    fn gaussian_integrated_max_joint() {
        let prior = ScalarPrior::gaussian(0.0, 1.0).unwrap();
        let ch = AwgnChannel::new(1.0).unwrap();
        let v = integrated_max_joint(&prior, &ch, 1.0, 2, &cfg()).unwrap();
        let h = 2.0 * q(std::f64::consts::FRAC_1_SQRT_2);
        assert!((v - (2.0 - h)).abs() < 1e-6, "{v}");
        assert!((v - 1.520_50).abs() < 1e-4);
    }

    #[test]
    fn far_separation_gives_m() {
        let cases = [
            ScalarPrior::uniform(0.0, 1.0).unwrap(),
            ScalarPrior::bernoulli(0.3).unwrap(),
            ScalarPrior::gaussian(0.0, 1.0).unwrap(),
        ];
        let ch = AwgnChannel::new(1.0).unwrap();
        for p in cases {
            for m in [2, 3] {
                let v = integrated_max_joint(&p, &ch, 100.0 * p.spread(), m, &cfg()).unwrap();
                assert!((v - m as f64).abs() < 1e-3, "{p:?}: {v}");
            }
        }
    }

    #[test]
    fn bernoulli_generic_offset_is_degenerate() {
        let p = ScalarPrior::bernoulli(0.3).unwrap();
        for eta in [0.01, 1.0, 100.0] {
            let v = integrated_max_joint(&p, &AwgnChannel::new(eta).unwrap(), 0.37, 2, &cfg()).unwrap();
            assert!((v - 2.0).abs() < 1e-9);
        }
        // aligned at t = 1: the pair (1, 0) forms a binary test
        let ch = AwgnChannel::new(1.0).unwrap();
        let h = h_discrete(&p, &ch, 1.0, 2).unwrap();
        let exact = ch.binary_error_closed_form(1.0, 0.7).unwrap();
        assert!((h - exact).abs() < 1e-12);
    }

    #[test]
    fn integrated_max_joint_in_range() {
        let priors = [
            ScalarPrior::uniform(0.0, 1.0).unwrap(),
            ScalarPrior::piecewise_uniform(vec![(0.0, 0.5), (1.0, 1.5)], vec![1.0, 1.0]).unwrap(),
            ScalarPrior::symmetric_gaussian_pair(0.3, 2.0).unwrap(),
            ScalarPrior::mixed(0.5, ScalarPrior::uniform(0.0, 1.0).unwrap(), ScalarPrior::pmf(vec![(2.0, 1.0)]).unwrap())
                .unwrap(),
        ];
        for p in priors {
            for eta in [0.01, 1.0, 100.0] {
                let ch = AwgnChannel::new(eta).unwrap();
                for t in [0.01, 0.3, 1.0, 3.0] {
                    for m in [2, 4] {
                        let v = integrated_max_joint(&p, &ch, t, m, &cfg()).unwrap();
                        assert!(v >= 1.0 - 1e-9 && v <= m as f64 + 1e-9, "{p:?} {t} {m}: {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn atom_groups() {
        let p = ScalarPrior::pmf(vec![(0.0, 0.2), (0.4, 0.3), (1.0, 0.5)]).unwrap();
        assert_eq!(aligned_atom_groups(&p, 0.4, 2), vec![vec![0.2, 0.3]]);
        assert!(aligned_atom_groups(&p, 0.37, 2).is_empty());
        let g = aligned_atom_groups(&ScalarPrior::bernoulli(0.5).unwrap(), 0.5, 3);
        assert_eq!(g, vec![vec![0.5, 0.0, 0.5]]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(HypothesisSpec::new(0.0, vec![0.0], vec![1.0]).is_err());
        assert!(HypothesisSpec::new(0.0, vec![0.0, 1.0, 3.0], vec![0.2, 0.3, 0.5]).is_err());
        assert!(HypothesisSpec::new(0.0, vec![0.0, 1.0], vec![0.2, 0.3]).is_err());
        let ch = AwgnChannel::new(1.0).unwrap();
        let p = ScalarPrior::gaussian(0.0, 1.0).unwrap();
        assert!(integrated_max_joint(&p, &ch, 0.0, 2, &cfg()).is_err());
        assert!(integrated_max_joint(&p, &ch, 1.0, 1, &cfg()).is_err());
    }
}

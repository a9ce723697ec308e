//! Scalar and product-form input distributions.
//!
//! A [`ScalarPrior`] is an immutable, validated value. Shifted priors are
//! never built; consumers evaluate [`ScalarPrior::density`] and
//! [`ScalarPrior::atoms`] at translated arguments instead.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{log_sum_exp, SQRT_2PI};
use crate::numerics::{integrate_pieces, QuadratureConfig};

const MASS_TOL: f64 = 1e-12;

/// Number of standard deviations treated as the edge of a Gaussian support.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 10.0;

/// The distribution families understood by the engine.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorKind {
    Uniform { a: f64, b: f64 },
    Gaussian { mean: f64, variance: f64 },
    GaussianMixture { weights: Vec<f64>, means: Vec<f64>, variances: Vec<f64> },
    /// Disjoint intervals, sorted by left end, with constant heights.
    PiecewiseUniform { intervals: Vec<(f64, f64)>, heights: Vec<f64> },
    /// Atoms sorted by location.
    FinitePmf { atoms: Vec<(f64, f64)> },
    /// `alpha * continuous + (1 - alpha) * discrete`.
    Mixed { alpha: f64, continuous: Box<ScalarPrior>, discrete: Box<ScalarPrior> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::schema::PriorSchema", into = "crate::schema::PriorSchema")]
pub struct ScalarPrior {
    kind: PriorKind,
}

impl ScalarPrior {
    pub fn new(kind: PriorKind) -> Result<Self> {
        let kind = validate(kind)?;
        Ok(Self { kind })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(PriorKind::Uniform { a, b })
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Self::new(PriorKind::Gaussian { mean, variance })
    }

    pub fn gaussian_mixture(weights: Vec<f64>, means: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        Self::new(PriorKind::GaussianMixture { weights, means, variances })
    }

    pub fn piecewise_uniform(intervals: Vec<(f64, f64)>, heights: Vec<f64>) -> Result<Self> {
        Self::new(PriorKind::PiecewiseUniform { intervals, heights })
    }

    pub fn pmf(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(PriorKind::FinitePmf { atoms })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Invalid(format!("Bernoulli parameter must lie in [0, 1], got {p}")));
        }
        let atoms = [(0.0, 1.0 - p), (1.0, p)].into_iter().filter(|a| a.1 > 0.0).collect();
        Self::pmf(atoms)
    }

    pub fn mixed(alpha: f64, continuous: ScalarPrior, discrete: ScalarPrior) -> Result<Self> {
        Self::new(PriorKind::Mixed { alpha, continuous: Box::new(continuous), discrete: Box::new(discrete) })
    }

    /// `ω N(-μ, 1) + (1 - ω) N(μ, 1)`.
    pub fn symmetric_gaussian_pair(omega: f64, mu: f64) -> Result<Self> {
        Self::gaussian_mixture(vec![omega, 1.0 - omega], vec![-mu, mu], vec![1.0, 1.0])
    }

    pub fn kind(&self) -> &PriorKind {
        &self.kind
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self.kind, PriorKind::FinitePmf { .. } | PriorKind::Mixed { .. })
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms().is_empty()
    }

    /// Weight of the absolutely continuous part.
    pub fn continuous_mass(&self) -> f64 {
        match &self.kind {
            PriorKind::FinitePmf { .. } => 0.0,
            PriorKind::Mixed { alpha, .. } => *alpha,
            _ => 1.0,
        }
    }

    /// Lebesgue density of the continuous component scaled by its weight.
    /// Atoms are not included.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("density evaluated at {x}")));
        }
        if let PriorKind::FinitePmf { .. } = self.kind {
            return Err(Error::Unsupported("a finite PMF has no Lebesgue density".into()));
        }
        Ok(self.density_at(x))
    }

    /// [`density`](Self::density) without checks; zero for a pure PMF.
    pub fn density_at(&self, x: f64) -> f64 {
        match &self.kind {
            PriorKind::Uniform { a, b } => {
                if x >= *a && x <= *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            PriorKind::Gaussian { mean, variance } => gaussian_pdf(x, *mean, *variance),
            PriorKind::GaussianMixture { weights, means, variances } => weights
                .iter()
                .zip(means)
                .zip(variances)
                .filter(|((w, _), _)| **w > 0.0)
                .map(|((w, m), v)| w * gaussian_pdf(x, *m, *v))
                .sum(),
            PriorKind::PiecewiseUniform { intervals, heights } => intervals
                .iter()
                .zip(heights)
                .find(|((lo, hi), _)| x >= *lo && x <= *hi)
                .map_or(0.0, |(_, h)| *h),
            PriorKind::FinitePmf { .. } => 0.0,
            PriorKind::Mixed { alpha, continuous, .. } => alpha * continuous.density_at(x),
        }
    }

    /// Natural log of the (scaled) density, computed without underflow for
    /// Gaussian families.
    pub fn log_density_at(&self, x: f64) -> f64 {
        match &self.kind {
            PriorKind::Gaussian { mean, variance } => gaussian_log_pdf(x, *mean, *variance),
            PriorKind::GaussianMixture { weights, means, variances } => {
                let terms: Vec<f64> = weights
                    .iter()
                    .zip(means)
                    .zip(variances)
                    .filter(|((w, _), _)| **w > 0.0)
                    .map(|((w, m), v)| w.ln() + gaussian_log_pdf(x, *m, *v))
                    .collect();
                log_sum_exp(&terms)
            }
            PriorKind::Mixed { alpha, continuous, .. } => alpha.ln() + continuous.log_density_at(x),
            _ => self.density_at(x).ln(),
        }
    }

    /// Score `f'(x) / f(x)` of a smooth density.
    fn score_at(&self, x: f64) -> f64 {
        match &self.kind {
            PriorKind::Gaussian { mean, variance } => -(x - mean) / variance,
            PriorKind::GaussianMixture { weights, means, variances } => {
                let log_terms: Vec<(f64, f64)> = weights
                    .iter()
                    .zip(means)
                    .zip(variances)
                    .filter(|((w, _), _)| **w > 0.0)
                    .map(|((w, m), v)| (w.ln() + gaussian_log_pdf(x, *m, *v), -(x - m) / v))
                    .collect();
                let lse = log_sum_exp(&log_terms.iter().map(|t| t.0).collect::<Vec<_>>());
                log_terms.iter().map(|(l, s)| (l - lse).exp() * s).sum()
            }
            _ => f64::NAN,
        }
    }

    /// Discrete atoms, scaled by `1 - alpha` for mixed priors.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            PriorKind::FinitePmf { atoms } => atoms.clone(),
            PriorKind::Mixed { alpha, discrete, .. } => {
                discrete.atoms().into_iter().map(|(x, p)| (x, (1.0 - alpha) * p)).filter(|a| a.1 > 0.0).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Mass of the atom at exactly `x` (zero if none).
    pub fn atom_mass_at(&self, x: f64) -> f64 {
        match &self.kind {
            PriorKind::FinitePmf { atoms } => atoms.iter().find(|a| a.0 == x).map_or(0.0, |a| a.1),
            PriorKind::Mixed { alpha, discrete, .. } => (1.0 - alpha) * discrete.atom_mass_at(x),
            _ => 0.0,
        }
    }

    /// Exact mean and variance.
    pub fn mean_variance(&self) -> (f64, f64) {
        let (m1, m2) = self.raw_moments();
        (m1, (m2 - m1 * m1).max(0.0))
    }

    fn raw_moments(&self) -> (f64, f64) {
        match &self.kind {
            PriorKind::Uniform { a, b } => ((a + b) / 2.0, (a * a + a * b + b * b) / 3.0),
            PriorKind::Gaussian { mean, variance } => (*mean, variance + mean * mean),
            PriorKind::GaussianMixture { weights, means, variances } => {
                let mut m1 = 0.0;
                let mut m2 = 0.0;
                for ((w, m), v) in weights.iter().zip(means).zip(variances) {
                    m1 += w * m;
                    m2 += w * (v + m * m);
                }
                (m1, m2)
            }
            PriorKind::PiecewiseUniform { intervals, heights } => {
                let mut m1 = 0.0;
                let mut m2 = 0.0;
                for ((lo, hi), h) in intervals.iter().zip(heights) {
                    m1 += h * (hi * hi - lo * lo) / 2.0;
                    m2 += h * (hi.powi(3) - lo.powi(3)) / 3.0;
                }
                (m1, m2)
            }
            PriorKind::FinitePmf { atoms } => {
                atoms.iter().fold((0.0, 0.0), |(m1, m2), (x, p)| (m1 + p * x, m2 + p * x * x))
            }
            PriorKind::Mixed { alpha, continuous, discrete } => {
                let (c1, c2) = continuous.raw_moments();
                let (d1, d2) = discrete.raw_moments();
                (alpha * c1 + (1.0 - alpha) * d1, alpha * c2 + (1.0 - alpha) * d2)
            }
        }
    }

    /// Support of the continuous component, Gaussians cut at
    /// [`GAUSSIAN_SUPPORT_SIGMAS`]. `None` for a pure PMF.
    pub fn continuous_support(&self) -> Option<(f64, f64)> {
        match &self.kind {
            PriorKind::Uniform { a, b } => Some((*a, *b)),
            PriorKind::Gaussian { mean, variance } => {
                let r = GAUSSIAN_SUPPORT_SIGMAS * variance.sqrt();
                Some((mean - r, mean + r))
            }
            PriorKind::GaussianMixture { weights, means, variances } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for ((w, m), v) in weights.iter().zip(means).zip(variances) {
                    if *w > 0.0 {
                        let r = GAUSSIAN_SUPPORT_SIGMAS * v.sqrt();
                        lo = lo.min(m - r);
                        hi = hi.max(m + r);
                    }
                }
                Some((lo, hi))
            }
            PriorKind::PiecewiseUniform { intervals, heights } => {
                let live: Vec<_> = intervals.iter().zip(heights).filter(|(_, h)| **h > 0.0).collect();
                Some((live.first()?.0 .0, live.last()?.0 .1))
            }
            PriorKind::FinitePmf { .. } => None,
            PriorKind::Mixed { alpha, continuous, .. } => {
                if *alpha > 0.0 {
                    continuous.continuous_support()
                } else {
                    None
                }
            }
        }
    }

    /// Smallest interval holding both the continuous support and every atom.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let Some((a, b)) = self.continuous_support() {
            lo = a;
            hi = b;
        }
        for (x, _) in self.atoms() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        (lo, hi)
    }

    pub fn spread(&self) -> f64 {
        let (lo, hi) = self.support();
        hi - lo
    }

    /// Points where the continuous density jumps or kinks.
    pub fn density_breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PriorKind::Uniform { a, b } => vec![*a, *b],
            PriorKind::PiecewiseUniform { intervals, .. } => {
                let mut v: Vec<f64> = intervals.iter().flat_map(|(a, b)| [*a, *b]).collect();
                v.dedup();
                v
            }
            PriorKind::GaussianMixture { weights, means, .. } => {
                means.iter().zip(weights).filter(|(_, w)| **w > 0.0).map(|(m, _)| *m).collect()
            }
            PriorKind::Gaussian { mean, .. } => vec![*mean],
            PriorKind::FinitePmf { .. } => Vec::new(),
            PriorKind::Mixed { alpha, continuous, .. } => {
                if *alpha > 0.0 {
                    continuous.density_breakpoints()
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Whether the continuous density is piecewise constant (and so has
    /// jump discontinuities rather than smooth crossings).
    pub fn is_piecewise_constant(&self) -> bool {
        match &self.kind {
            PriorKind::Uniform { .. } | PriorKind::PiecewiseUniform { .. } => true,
            PriorKind::Mixed { continuous, .. } => continuous.is_piecewise_constant(),
            _ => false,
        }
    }

    /// `(alpha, d)` of the continuous/atomic decomposition; `d = 1`.
    pub fn mixture_decomposition(&self) -> (f64, usize) {
        (self.continuous_mass(), 1)
    }

    /// Fisher information `∫ (f')² / f` of a smooth density.
    pub fn fisher_information(&self, cfg: &QuadratureConfig) -> Result<f64> {
        match &self.kind {
            PriorKind::Gaussian { variance, .. } => Ok(1.0 / variance),
            PriorKind::GaussianMixture { .. } => {
                let (lo, hi) = self.continuous_support().expect("mixture has support");
                let mut pts = self.density_breakpoints();
                crate::numerics::quadrature::normalize_breakpoints(&mut pts, lo, hi);
                let q = integrate_pieces(
                    |x| {
                        let s = self.score_at(x);
                        self.density_at(x) * s * s
                    },
                    &pts,
                    cfg,
                )?;
                Ok(q.value)
            }
            _ => Err(Error::Regularity(
                "Fisher information needs a differentiable density on an open support (Gaussian families only)".into(),
            )),
        }
    }

    /// Differential entropy `-∫ f ln f` (nats).
    pub fn differential_entropy(&self, cfg: &QuadratureConfig) -> Result<f64> {
        match &self.kind {
            PriorKind::Gaussian { variance, .. } => {
                Ok(0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * variance).ln())
            }
            PriorKind::Uniform { a, b } => Ok((b - a).ln()),
            PriorKind::PiecewiseUniform { intervals, heights } => Ok(intervals
                .iter()
                .zip(heights)
                .filter(|(_, h)| **h > 0.0)
                .map(|((lo, hi), h)| -h * (hi - lo) * h.ln())
                .sum()),
            PriorKind::GaussianMixture { .. } => {
                let (lo, hi) = self.continuous_support().expect("mixture has support");
                let mut pts = self.density_breakpoints();
                crate::numerics::quadrature::normalize_breakpoints(&mut pts, lo, hi);
                let q = integrate_pieces(
                    |x| {
                        let f = self.density_at(x);
                        if f > 0.0 {
                            -f * self.log_density_at(x)
                        } else {
                            0.0
                        }
                    },
                    &pts,
                    cfg,
                )?;
                Ok(q.value)
            }
            PriorKind::FinitePmf { .. } | PriorKind::Mixed { .. } => {
                Err(Error::Unsupported("differential entropy is undefined for priors with atoms".into()))
            }
        }
    }

    /// Draws one sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            PriorKind::Uniform { a, b } => a + (b - a) * rng.gen::<f64>(),
            PriorKind::Gaussian { mean, variance } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + variance.sqrt() * z
            }
            PriorKind::GaussianMixture { weights, means, variances } => {
                let k = pick(weights, rng.gen::<f64>());
                let z: f64 = StandardNormal.sample(rng);
                means[k] + variances[k].sqrt() * z
            }
            PriorKind::PiecewiseUniform { intervals, heights } => {
                let masses: Vec<f64> = intervals.iter().zip(heights).map(|((a, b), h)| h * (b - a)).collect();
                let k = pick(&masses, rng.gen::<f64>());
                let (a, b) = intervals[k];
                a + (b - a) * rng.gen::<f64>()
            }
            PriorKind::FinitePmf { atoms } => {
                let masses: Vec<f64> = atoms.iter().map(|a| a.1).collect();
                atoms[pick(&masses, rng.gen::<f64>())].0
            }
            PriorKind::Mixed { alpha, continuous, discrete } => {
                if rng.gen::<f64>() < *alpha {
                    continuous.sample(rng)
                } else {
                    discrete.sample(rng)
                }
            }
        }
    }
}

fn pick(masses: &[f64], u: f64) -> usize {
    let total: f64 = masses.iter().sum();
    let mut acc = 0.0;
    for (i, m) in masses.iter().enumerate() {
        acc += m / total;
        if u < acc {
            return i;
        }
    }
    masses.iter().rposition(|m| *m > 0.0).unwrap_or(0)
}

pub(crate) fn gaussian_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let z = (x - mean) / variance.sqrt();
    (-0.5 * z * z).exp() / (SQRT_2PI * variance.sqrt())
}

pub(crate) fn gaussian_log_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -0.5 * d * d / variance - 0.5 * (2.0 * std::f64::consts::PI * variance).ln()
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} must be finite, got {v}")))
    }
}

fn check_total(name: &str, total: f64) -> Result<()> {
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::Invalid(format!("{name} must sum to 1, got {total}")));
    }
    Ok(())
}

fn validate(kind: PriorKind) -> Result<PriorKind> {
    match kind {
        PriorKind::Uniform { a, b } => {
            finite("uniform bound", a)?;
            finite("uniform bound", b)?;
            if !(a < b) {
                return Err(Error::Invalid(format!("uniform needs a < b, got [{a}, {b}]")));
            }
            Ok(PriorKind::Uniform { a, b })
        }
        PriorKind::Gaussian { mean, variance } => {
            finite("gaussian mean", mean)?;
            if !(variance > 0.0 && variance.is_finite()) {
                return Err(Error::Invalid(format!("gaussian variance must be positive, got {variance}")));
            }
            Ok(PriorKind::Gaussian { mean, variance })
        }
        PriorKind::GaussianMixture { weights, means, variances } => {
            if weights.is_empty() || weights.len() != means.len() || weights.len() != variances.len() {
                return Err(Error::Invalid("mixture weights, means and variances must be nonempty and equally long".into()));
            }
            for (&w, (&m, &v)) in weights.iter().zip(means.iter().zip(&variances)) {
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::Invalid(format!("mixture weight {w} outside [0, 1]")));
                }
                finite("mixture mean", m)?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Invalid(format!("mixture variance must be positive, got {v}")));
                }
            }
            check_total("mixture weights", weights.iter().sum())?;
            Ok(PriorKind::GaussianMixture { weights, means, variances })
        }
        PriorKind::PiecewiseUniform { intervals, heights } => {
            if intervals.is_empty() || intervals.len() != heights.len() {
                return Err(Error::Invalid("piecewise uniform needs equally many intervals and heights".into()));
            }
            let mut pairs: Vec<((f64, f64), f64)> = intervals.into_iter().zip(heights).collect();
            for ((a, b), h) in &pairs {
                finite("interval end", *a)?;
                finite("interval end", *b)?;
                if !(a < b) {
                    return Err(Error::Invalid(format!("interval [{a}, {b}] is empty")));
                }
                if !(*h >= 0.0 && h.is_finite()) {
                    return Err(Error::Invalid(format!("height {h} must be nonnegative")));
                }
            }
            pairs.sort_by(|x, y| x.0 .0.total_cmp(&y.0 .0));
            if pairs.windows(2).any(|w| w[1].0 .0 < w[0].0 .1) {
                return Err(Error::Invalid("piecewise uniform intervals overlap".into()));
            }
            check_total("piecewise uniform mass", pairs.iter().map(|((a, b), h)| h * (b - a)).sum())?;
            let (intervals, heights) = pairs.into_iter().unzip();
            Ok(PriorKind::PiecewiseUniform { intervals, heights })
        }
        PriorKind::FinitePmf { mut atoms } => {
            if atoms.is_empty() {
                return Err(Error::Invalid("a PMF needs at least one atom".into()));
            }
            for (x, p) in &atoms {
                finite("atom location", *x)?;
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Invalid(format!("atom mass {p} outside [0, 1]")));
                }
            }
            atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
            if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Invalid("atom locations must be distinct".into()));
            }
            check_total("atom masses", atoms.iter().map(|a| a.1).sum())?;
            atoms.retain(|a| a.1 > 0.0);
            Ok(PriorKind::FinitePmf { atoms })
        }
        PriorKind::Mixed { alpha, continuous, discrete } => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::Invalid(format!("mixed alpha {alpha} outside [0, 1]")));
            }
            if !continuous.is_continuous() {
                return Err(Error::Invalid("mixed prior's continuous part must be a continuous family".into()));
            }
            if !matches!(discrete.kind, PriorKind::FinitePmf { .. }) {
                return Err(Error::Invalid("mixed prior's discrete part must be a PMF".into()));
            }
            Ok(PriorKind::Mixed { alpha, continuous, discrete })
        }
    }
}

/// Independent components `X = (X_1, ..., X_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ScalarPrior>", into = "Vec<ScalarPrior>")]
pub struct ProductPrior {
    components: Vec<ScalarPrior>,
}

impl ProductPrior {
    pub fn new(components: Vec<ScalarPrior>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("a product prior needs at least one component".into()));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[ScalarPrior] {
        &self.components
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    /// `(alpha, d)`; every component must share the same `alpha`.
    pub fn mixture_decomposition(&self) -> Result<(f64, usize)> {
        let alpha = self.components[0].continuous_mass();
        if self.components.iter().any(|c| (c.continuous_mass() - alpha).abs() > 1e-12) {
            return Err(Error::Unsupported(
                "components have different continuous weights; the joint decomposition is not of single-alpha form".into(),
            ));
        }
        Ok((alpha, self.components.len()))
    }

    pub fn total_variance(&self) -> f64 {
        self.components.iter().map(|c| c.mean_variance().1).sum()
    }
}

impl From<ScalarPrior> for ProductPrior {
    fn from(p: ScalarPrior) -> Self {
        Self { components: vec![p] }
    }
}

impl TryFrom<Vec<ScalarPrior>> for ProductPrior {
    type Error = Error;
    fn try_from(v: Vec<ScalarPrior>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProductPrior> for Vec<ScalarPrior> {
    fn from(p: ProductPrior) -> Self {
        p.components
    }
}

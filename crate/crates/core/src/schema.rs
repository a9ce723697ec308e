//! JSON shape of a scalar prior.
//!
//! ```json
//! {"type": "gaussian_mixture", "weights": [0.5, 0.5], "means": [-1, 1], "variances": [1, 1]}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::{PriorKind, ScalarPrior};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSchema {
    Uniform { a: f64, b: f64 },
    Gaussian { mean: f64, variance: f64 },
    GaussianMixture { weights: Vec<f64>, means: Vec<f64>, variances: Vec<f64> },
    PiecewiseUniform { intervals: Vec<(f64, f64)>, heights: Vec<f64> },
    /// `atoms` is a list of `[location, mass]` pairs.
    Pmf { atoms: Vec<(f64, f64)> },
    Bernoulli { p: f64 },
    Mixed { alpha: f64, continuous: Box<ScalarPrior>, discrete: Box<ScalarPrior> },
}

impl TryFrom<PriorSchema> for ScalarPrior {
    type Error = Error;

    fn try_from(s: PriorSchema) -> Result<Self> {
        let kind = match s {
            PriorSchema::Uniform { a, b } => PriorKind::Uniform { a, b },
            PriorSchema::Gaussian { mean, variance } => PriorKind::Gaussian { mean, variance },
            PriorSchema::GaussianMixture { weights, means, variances } => {
                PriorKind::GaussianMixture { weights, means, variances }
            }
            PriorSchema::PiecewiseUniform { intervals, heights } => PriorKind::PiecewiseUniform { intervals, heights },
            PriorSchema::Pmf { atoms } => PriorKind::FinitePmf { atoms },
            PriorSchema::Bernoulli { p } => return ScalarPrior::bernoulli(p),
            PriorSchema::Mixed { alpha, continuous, discrete } => PriorKind::Mixed { alpha, continuous, discrete },
        };
        ScalarPrior::new(kind)
    }
}

impl From<ScalarPrior> for PriorSchema {
    fn from(p: ScalarPrior) -> Self {
        match p.kind().clone() {
            PriorKind::Uniform { a, b } => PriorSchema::Uniform { a, b },
            PriorKind::Gaussian { mean, variance } => PriorSchema::Gaussian { mean, variance },
            PriorKind::GaussianMixture { weights, means, variances } => {
                PriorSchema::GaussianMixture { weights, means, variances }
            }
            PriorKind::PiecewiseUniform { intervals, heights } => PriorSchema::PiecewiseUniform { intervals, heights },
            PriorKind::FinitePmf { atoms } => PriorSchema::Pmf { atoms },
            PriorKind::Mixed { alpha, continuous, discrete } => PriorSchema::Mixed { alpha, continuous, discrete },
        }
    }
}

/// Parses a prior from JSON text.
pub fn parse_prior(text: &str) -> Result<ScalarPrior> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("prior: {e}")))
}

//! Additive white Gaussian noise observation model `Y = X + N`, `N ~ N(0, η)`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{q, SQRT_2PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelSchema", into = "ChannelSchema")]
pub struct AwgnChannel {
    eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSchema {
    Awgn { eta: f64 },
}

impl TryFrom<ChannelSchema> for AwgnChannel {
    type Error = Error;
    fn try_from(s: ChannelSchema) -> Result<Self> {
        let ChannelSchema::Awgn { eta } = s;
        AwgnChannel::new(eta)
    }
}

impl From<AwgnChannel> for ChannelSchema {
    fn from(c: AwgnChannel) -> Self {
        ChannelSchema::Awgn { eta: c.eta }
    }
}

impl AwgnChannel {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Invalid(format!("noise level must be positive and finite, got {eta}")));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn sigma(&self) -> f64 {
        self.eta.sqrt()
    }

    /// Density of `y` given input `x`.
    pub fn likelihood(&self, y: f64, x: f64) -> f64 {
        let d = y - x;
        (-0.5 * d * d / self.eta).exp() / (SQRT_2PI * self.sigma())
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        x + self.sigma() * z
    }

    /// Minimum Bayes error for `N(0, η)` versus `N(t, η)` with priors
    /// `(π₀, 1 − π₀)`.
    pub fn binary_error_closed_form(&self, t: f64, prior0: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("separation must be positive, got {t}")));
        }
        if !(0.0..=1.0).contains(&prior0) {
            return Err(Error::Domain(format!("prior must lie in [0, 1], got {prior0}")));
        }
        let p1 = 1.0 - prior0;
        if prior0 == 0.0 || p1 == 0.0 {
            return Ok(0.0);
        }
        let s = self.sigma();
        let a = t / (2.0 * s);
        let b = s / t * (prior0 / p1).ln();
        Ok(prior0 * q(a + b) + p1 * q(a - b))
    }
}

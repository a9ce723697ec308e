//! Experiment configuration files.

use std::path::PathBuf;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer};
use serde_json::Value;

use zzbound_core::baseline::OracleMethod;
use zzbound_core::detect::MAX_M;
use zzbound_core::numerics::{QuadratureConfig, SearchConfig};
use zzbound_core::{AwgnChannel, ProductPrior, ScalarPrior};

use crate::failure::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    ZzValley,
    ZzPlain,
    Szzb,
    HighnoiseValley,
    HighnoisePlain,
    HighnoiseSp,
    Mmse,
    Crb,
    CrbChannel,
    Meb,
    Variance,
}

impl BoundFamily {
    pub fn name(self) -> &'static str {
        match self {
            Self::ZzValley => "zz_valley",
            Self::ZzPlain => "zz_plain",
            Self::Szzb => "szzb",
            Self::HighnoiseValley => "highnoise_valley",
            Self::HighnoisePlain => "highnoise_plain",
            Self::HighnoiseSp => "highnoise_sp",
            Self::Mmse => "mmse",
            Self::Crb => "crb",
            Self::CrbChannel => "crb_channel",
            Self::Meb => "meb",
            Self::Variance => "variance",
        }
    }

    pub fn is_high_noise(self) -> bool {
        matches!(self, Self::HighnoiseValley | Self::HighnoisePlain | Self::HighnoiseSp)
    }

    pub fn needs_channel(self) -> bool {
        matches!(self, Self::ZzValley | Self::ZzPlain | Self::Szzb | Self::Mmse | Self::CrbChannel)
    }

    /// Families whose value depends on the number of hypotheses.
    pub fn uses_m(self) -> bool {
        matches!(
            self,
            Self::ZzValley | Self::ZzPlain | Self::Szzb | Self::HighnoiseValley | Self::HighnoisePlain | Self::HighnoiseSp
        )
    }
}

/// A scalar prior, or a list of independent components.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    Scalar(ScalarPrior),
    Product(ProductPrior),
}

impl PriorSpec {
    pub fn components(&self) -> Vec<ScalarPrior> {
        match self {
            Self::Scalar(p) => vec![p.clone()],
            Self::Product(p) => p.components().to_vec(),
        }
    }

    pub fn product(&self) -> ProductPrior {
        match self {
            Self::Scalar(p) => p.clone().into(),
            Self::Product(p) => p.clone(),
        }
    }
}

impl<'de> Deserialize<'de> for PriorSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        if v.is_array() {
            let parts = Vec::<ScalarPrior>::deserialize(v).map_err(D::Error::custom)?;
            ProductPrior::new(parts).map(Self::Product).map_err(D::Error::custom)
        } else {
            ScalarPrior::deserialize(v).map(Self::Scalar).map_err(D::Error::custom)
        }
    }
}

fn default_m() -> usize {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    pub family: BoundFamily,
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOverride {
    pub n_points: Option<usize>,
    /// Upper end of the separation grid (and of the single-point search).
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleOverride {
    pub method: OracleMethod,
    pub samples: usize,
}

impl Default for OracleOverride {
    fn default() -> Self {
        Self { method: OracleMethod::PosteriorQuadrature, samples: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Dotted path into the configuration, e.g. `channel.eta` or `prior.p`.
    pub parameter: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub prior: PriorSpec,
    #[serde(default)]
    pub channel: Option<AwgnChannel>,
    pub bound: BoundSpec,
    #[serde(default)]
    pub grid: GridOverride,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub quad: QuadratureConfig,
    #[serde(default)]
    pub oracle: OracleOverride,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let fam = self.bound.family;
        if fam.is_high_noise() && self.channel.is_some() {
            return Err(CliError::config(format!("{} is channel-free; remove the channel block", fam.name())));
        }
        if fam.needs_channel() && self.channel.is_none() {
            return Err(CliError::config(format!("{} needs a channel block", fam.name())));
        }
        if fam.uses_m() && !(2..=MAX_M).contains(&self.bound.m) {
            return Err(CliError::config(format!("M must lie in [2, {MAX_M}], got {}", self.bound.m)));
        }
        if let Some(n) = self.grid.n_points {
            if n < 8 {
                return Err(CliError::config("grid.n_points must be at least 8"));
            }
        }
        if let Some(t) = self.grid.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::config("grid.t_max must be positive"));
            }
        }
        self.search.validate().map_err(CliError::from_core)?;
        self.quad.validate().map_err(CliError::from_core)?;
        Ok(())
    }
}

/// A parsed configuration and, for sweeps, one instance per sweep value.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub base: ExperimentConfig,
    /// `(sweep value, instantiated config)`; a single `None` entry without a sweep.
    pub points: Vec<(Option<Value>, ExperimentConfig)>,
}

pub fn parse(text: &str) -> Result<Experiment, CliError> {
    let raw: Value = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
    let base: ExperimentConfig = serde_json::from_value(raw.clone()).map_err(|e| CliError::config(e.to_string()))?;
    base.validate()?;
    let points = match &base.sweep {
        None => vec![(None, base.clone())],
        Some(sweep) => {
            if sweep.values.is_empty() {
                return Err(CliError::config("sweep.values is empty"));
            }
            let mut stripped = raw.clone();
            if let Some(obj) = stripped.as_object_mut() {
                obj.remove("sweep");
            }
            sweep
                .values
                .iter()
                .map(|v| {
                    let mut inst = stripped.clone();
                    set_path(&mut inst, &sweep.parameter, v.clone())?;
                    let cfg: ExperimentConfig = serde_json::from_value(inst).map_err(|e| {
                        CliError::config(format!("sweep value {v} for {}: {e}", sweep.parameter))
                    })?;
                    cfg.validate()?;
                    Ok((Some(v.clone()), cfg))
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    Ok(Experiment { base, points })
}

/// Replaces the existing value at a dotted path; numeric segments index arrays.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut cur = root;
    for seg in path.split('.') {
        cur = match cur {
            Value::Object(map) => map.get_mut(seg),
            Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| CliError::config(format!("sweep parameter {path}: no field {seg}")))?;
    }
    *cur = value;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let e = parse(r#"{"prior":{"type":"gaussian","mean":0,"variance":1},"channel":{"type":"awgn","eta":1},"bound":{"family":"zz_plain","M":2}}"#).unwrap();
        assert_eq!(e.points.len(), 1);
        assert_eq!(e.base.bound.family, BoundFamily::ZzPlain);
    }

    #[test]
    fn product_prior_list() {
        let e = parse(r#"{"prior":[{"type":"uniform","a":0,"b":1},{"type":"gaussian","mean":0,"variance":1}],"bound":{"family":"variance"}}"#).unwrap();
        assert_eq!(e.base.prior.components().len(), 2);
    }

    #[test]
    fn channel_compatibility() {
        let hn = r#"{"prior":{"type":"bernoulli","p":0.3},"channel":{"type":"awgn","eta":1},"bound":{"family":"highnoise_valley"}}"#;
        assert_eq!(parse(hn).unwrap_err().exit_code(), 2);
        let crb = r#"{"prior":{"type":"bernoulli","p":0.3},"bound":{"family":"crb_channel"}}"#;
        assert_eq!(parse(crb).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn sweep_instances() {
        let e = parse(r#"{"prior":{"type":"bernoulli","p":0.3},"bound":{"family":"highnoise_sp"},"sweep":{"parameter":"prior.p","values":[0.1,0.5]}}"#).unwrap();
        assert_eq!(e.points.len(), 2);
        assert_eq!(e.points[1].1.prior, PriorSpec::Scalar(ScalarPrior::bernoulli(0.5).unwrap()));
    }

    #[test]
    fn bad_sweep_path_and_value() {
        let missing = r#"{"prior":{"type":"bernoulli","p":0.3},"bound":{"family":"variance"},"sweep":{"parameter":"channel.eta","values":[1]}}"#;
        assert_eq!(parse(missing).unwrap_err().exit_code(), 2);
        let invalid = r#"{"prior":{"type":"bernoulli","p":0.3},"bound":{"family":"variance"},"sweep":{"parameter":"prior.p","values":[1.5]}}"#;
        assert_eq!(parse(invalid).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_m() {
        let extra = r#"{"prior":{"type":"bernoulli","p":0.3},"bound":{"family":"variance"},"colour":1}"#;
        assert!(parse(extra).is_err());
        let m = r#"{"prior":{"type":"bernoulli","p":0.3},"bound":{"family":"highnoise_sp","M":1}}"#;
        assert!(parse(m).is_err());
    }
}

//! Evaluating a configuration into CSV rows.

use std::time::Instant;

use rayon::prelude::*;
use serde_json::Value;

use zzbound_core::asymptotic::high_noise_bounds;
use zzbound_core::baseline::{crb_gaussian_channel, crb_high_noise, meb, mmse, variance, OracleConfig};
use zzbound_core::numerics::{SearchConfig, Spacing};
use zzbound_core::zz::{default_grid, szzb, zzb};
use zzbound_core::{AwgnChannel, BoundOptions, ScalarPrior};

use crate::config::{BoundFamily, Experiment, ExperimentConfig, PriorSpec};
use crate::failure::CliError;
use crate::format::{csv_text, num};

/// One evaluated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub family: BoundFamily,
    pub m: usize,
    pub value: f64,
    pub per_axis: Vec<f64>,
    pub tail_flag: bool,
    pub argmax_delta: Option<f64>,
    /// Monte Carlo standard error above 1% of the estimate.
    pub mc_flag: bool,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Promote tail and Monte Carlo flags to failures.
    pub strict: bool,
    /// Fill the wall_time_ms column; off by default so output is reproducible.
    pub timing: bool,
}

struct Part {
    value: f64,
    tail: bool,
    delta: Option<f64>,
    mc_flag: bool,
}

impl Part {
    fn plain(value: f64) -> Self {
        Self { value, tail: false, delta: None, mc_flag: false }
    }
}

fn grid_for(cfg: &ExperimentConfig, p: &ScalarPrior, eta: Option<f64>, n: usize) -> zzbound_core::numerics::GridSpec {
    let mut g = default_grid(p, eta, cfg.bound.m, n);
    if let Some(t) = cfg.grid.t_max {
        g.t_max = t;
        if let Spacing::LogLinear { t_min, split } = g.spacing {
            g.spacing = Spacing::LogLinear { t_min: t_min.min(0.25 * t), split: split.min(0.5 * t) };
        }
    }
    g
}

fn component(cfg: &ExperimentConfig, p: &ScalarPrior) -> zzbound_core::Result<Part> {
    let m = cfg.bound.m;
    let n = cfg.grid.n_points.unwrap_or(BoundOptions::default().n_points);
    let ch = cfg.channel;
    let channel = || ch.ok_or_else(|| zzbound_core::Error::Invalid("missing channel".into()));
    match cfg.bound.family {
        BoundFamily::ZzValley | BoundFamily::ZzPlain => {
            let ch = channel()?;
            let grid = grid_for(cfg, p, Some(ch.eta()), n);
            let r = zzb(p, &ch, m, cfg.bound.family == BoundFamily::ZzValley, &grid, &cfg.quad)?;
            Ok(Part { value: r.value, tail: r.diagnostics.tail_flag, delta: None, mc_flag: false })
        }
        BoundFamily::Szzb => {
            let ch = channel()?;
            let search = SearchConfig {
                coarse_points: n.max(cfg.search.coarse_points),
                delta_max: cfg.search.delta_max.or(cfg.grid.t_max),
                ..cfg.search
            };
            let r = szzb(p, &ch, m, &search, &cfg.quad)?;
            Ok(Part { value: r.value, tail: r.diagnostics.tail_flag, delta: r.diagnostics.argmax_delta, mc_flag: false })
        }
        BoundFamily::HighnoiseValley | BoundFamily::HighnoisePlain | BoundFamily::HighnoiseSp => {
            let b = high_noise_bounds(p, m, &grid_for(cfg, p, None, n), &cfg.search, &cfg.quad)?;
            let value = match cfg.bound.family {
                BoundFamily::HighnoiseValley => b.v_bar,
                BoundFamily::HighnoisePlain => b.v,
                _ => b.v_sp,
            };
            let delta = (cfg.bound.family == BoundFamily::HighnoiseSp).then_some(b.argmax_delta).flatten();
            Ok(Part { value, tail: b.tail_flag, delta, mc_flag: false })
        }
        BoundFamily::Mmse => {
            let oc = OracleConfig { method: cfg.oracle.method, samples: cfg.oracle.samples, seed: cfg.seed, quad: cfg.quad };
            let e = mmse(p, &channel()?, &oc)?;
            Ok(Part { value: e.value, tail: false, delta: None, mc_flag: e.flagged })
        }
        BoundFamily::Crb => crb_high_noise(p, &cfg.quad).map(Part::plain),
        BoundFamily::CrbChannel => crb_gaussian_channel(&p.clone().into(), channel()?.eta(), &cfg.quad).map(Part::plain),
        BoundFamily::Meb => meb(p, &cfg.quad).map(Part::plain),
        BoundFamily::Variance => Ok(Part::plain(variance(p))),
    }
}

/// Evaluates one configuration.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Row, CliError> {
    let start = Instant::now();
    let comps = cfg.prior.components();
    let parts: Vec<Part> = comps.iter().map(|p| component(cfg, p)).collect::<zzbound_core::Result<_>>().map_err(CliError::from_core)?;
    let per_axis: Vec<f64> = parts.iter().map(|p| p.value).collect();
    let value = match (cfg.bound.family, &cfg.prior) {
        (BoundFamily::CrbChannel, PriorSpec::Product(prod)) => {
            let ch: AwgnChannel = cfg.channel.expect("validated");
            crb_gaussian_channel(prod, ch.eta(), &cfg.quad).map_err(CliError::from_core)?
        }
        (BoundFamily::Meb, PriorSpec::Product(prod)) => {
            // d e^{2h(X)/d} / (2πe) with h(X) the summed component entropies.
            let d = prod.dimension() as f64;
            let h: f64 = prod
                .components()
                .iter()
                .map(|c| c.differential_entropy(&cfg.quad))
                .sum::<zzbound_core::Result<f64>>()
                .map_err(CliError::from_core)?;
            d * (2.0 * h / d).exp() / (2.0 * std::f64::consts::PI * std::f64::consts::E)
        }
        _ => per_axis.iter().sum(),
    };
    Ok(Row {
        family: cfg.bound.family,
        m: cfg.bound.m,
        value,
        per_axis,
        tail_flag: parts.iter().any(|p| p.tail),
        argmax_delta: parts.first().and_then(|p| p.delta),
        mc_flag: parts.iter().any(|p| p.mc_flag),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn sweep_cell(v: &Option<Value>) -> String {
    match v {
        None => String::new(),
        Some(Value::Number(n)) => n.as_f64().map(num).unwrap_or_else(|| n.to_string()),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

/// Evaluates every sweep point (in parallel, rows kept in sweep order) and
/// renders the CSV.
pub fn run(exp: &Experiment, opts: RunOptions) -> Result<(String, Vec<Row>), CliError> {
    let rows: Vec<Row> = exp.points.par_iter().map(|(_, cfg)| evaluate(cfg)).collect::<Result<_, _>>()?;
    let dim = rows.iter().map(|r| r.per_axis.len()).max().unwrap_or(1);
    let mut header = vec!["sweep_value".to_string(), "family".into(), "M".into(), "value".into()];
    header.extend((1..=dim).map(|i| format!("per_axis_{i}")));
    header.extend(["tail_flag".to_string(), "argmax_delta".into(), "wall_time_ms".into()]);
    let body: Vec<Vec<String>> = exp
        .points
        .iter()
        .zip(&rows)
        .map(|((sv, _), r)| {
            let mut cells = vec![sweep_cell(sv), r.family.name().to_string(), r.m.to_string(), num(r.value)];
            cells.extend((0..dim).map(|i| r.per_axis.get(i).map(|v| num(*v)).unwrap_or_default()));
            cells.push(r.tail_flag.to_string());
            cells.push(r.argmax_delta.map(num).unwrap_or_default());
            cells.push(if opts.timing { format!("{:.3}", r.wall_time_ms) } else { String::new() });
            cells
        })
        .collect();
    let text = csv_text(&header, &body)?;
    Ok((text, rows))
}

/// Flag check applied after the CSV is written.
pub fn strict_failure(rows: &[Row]) -> Option<CliError> {
    let tails = rows.iter().filter(|r| r.tail_flag).count();
    let mc = rows.iter().filter(|r| r.mc_flag).count();
    (tails + mc > 0).then(|| {
        CliError::convergence(format!("{tails} row(s) with the grid tail flag and {mc} with the Monte Carlo flag set"))
    })
}

//! Regenerating the reference tables and figure data as CSV.

use rayon::prelude::*;

use zzbound_core::asymptotic::{gamma_constant, high_noise_bounds, HighNoiseBounds};
use zzbound_core::baseline::{crb_high_noise, meb, variance};
use zzbound_core::numerics::{QuadratureConfig, SearchConfig};
use zzbound_core::zz::{bound, default_grid};
use zzbound_core::{AwgnChannel, BoundOptions, Family, ScalarPrior};

use crate::failure::CliError;
use crate::format::{csv_text, num};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    Table1,
    Fig3,
    Bernoulli,
    #[value(name = "gaussian_lownoise", alias = "gaussian-lownoise")]
    GaussianLownoise,
    #[value(name = "example3_limits", alias = "example3-limits")]
    Example3Limits,
}

impl Target {
    pub const ALL: [Target; 5] = [Self::Table1, Self::Fig3, Self::Bernoulli, Self::GaussianLownoise, Self::Example3Limits];

    pub fn file_name(self) -> &'static str {
        match self {
            Self::Table1 => "table1.csv",
            Self::Fig3 => "fig3.csv",
            Self::Bernoulli => "bernoulli.csv",
            Self::GaussianLownoise => "gaussian_lownoise.csv",
            Self::Example3Limits => "example3_limits.csv",
        }
    }
}

/// A table ready to be written: header plus rows of formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        csv_text(&self.header, &self.rows)
    }

    /// Cell `col` of the first row whose leading cells equal `key`.
    pub fn lookup(&self, key: &[&str], col: &str) -> Option<f64> {
        let c = self.header.iter().position(|h| h == col)?;
        self.rows.iter().find(|r| r.iter().zip(key).all(|(a, b)| a == b)).and_then(|r| r[c].parse().ok())
    }
}

fn core(e: zzbound_core::Error) -> CliError {
    CliError::from_core(e)
}

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn hn(p: &ScalarPrior, m: usize) -> Result<HighNoiseBounds, CliError> {
    high_noise_bounds(p, m, &default_grid(p, None, m, BoundOptions::default().n_points), &SearchConfig::default(), &quad())
        .map_err(core)
}

pub fn uniform_prior() -> ScalarPrior {
    ScalarPrior::uniform(0.0, 1.0).expect("valid")
}

pub fn two_interval_prior() -> ScalarPrior {
    ScalarPrior::piecewise_uniform(vec![(0.0, 0.5), (1.0, 1.5)], vec![1.0, 1.0]).expect("valid")
}

pub fn table1(ms: &[usize]) -> Result<Table, CliError> {
    let mut t = Table::new(&["prior", "M", "variance", "v_bar", "v", "v_sp"]);
    let jobs: Vec<(&str, ScalarPrior, usize)> = [("X1", uniform_prior()), ("X2", two_interval_prior())]
        .into_iter()
        .flat_map(|(n, p)| ms.iter().map(move |&m| (n, p.clone(), m)))
        .collect();
    let out: Vec<HighNoiseBounds> = jobs.par_iter().map(|(_, p, m)| hn(p, *m)).collect::<Result<_, _>>()?;
    for ((name, p, m), b) in jobs.iter().zip(out) {
        t.rows.push(vec![name.to_string(), m.to_string(), num(variance(p)), num(b.v_bar), num(b.v), num(b.v_sp)]);
    }
    Ok(t)
}

/// High-noise panels for the symmetric two-component Gaussian mixture at M=2.
pub fn fig3(mus: &[f64], omegas: &[f64]) -> Result<Table, CliError> {
    let mut t = Table::new(&["mu", "omega", "mmse", "zzb", "szzb", "crb", "meb"]);
    let jobs: Vec<(f64, f64)> = mus.iter().flat_map(|&mu| omegas.iter().map(move |&w| (mu, w))).collect();
    let out: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|&(mu, w)| {
            let p = ScalarPrior::symmetric_gaussian_pair(w, mu).map_err(core)?;
            let b = hn(&p, 2)?;
            let crb = crb_high_noise(&p, &quad()).map_err(core)?;
            let meb_v = meb(&p, &quad()).map_err(core)?;
            // High noise: the MMSE is the prior variance.
            Ok(vec![num(mu), num(w), num(variance(&p)), num(b.v), num(b.v_sp), num(crb), num(meb_v)])
        })
        .collect::<Result<_, CliError>>()?;
    t.rows = out;
    Ok(t)
}

pub fn fig3_omegas() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

pub fn bernoulli(ps: &[f64]) -> Result<Table, CliError> {
    let mut t = Table::new(&["p", "variance", "v_bar", "v", "v_sp", "v_bar_closed_form", "v_sp_closed_form"]);
    let out: Vec<Vec<String>> = ps
        .par_iter()
        .map(|&p| {
            let prior = ScalarPrior::bernoulli(p).map_err(core)?;
            let b = hn(&prior, 2)?;
            let lo = p.min(1.0 - p);
            Ok(vec![num(p), num(variance(&prior)), num(b.v_bar), num(b.v), num(b.v_sp), num(lo / 4.0), num(lo / 2.0)])
        })
        .collect::<Result<_, CliError>>()?;
    t.rows = out;
    Ok(t)
}

/// Least-squares line through the points, evaluated at zero.
fn intercept(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    my - sxy / sxx * mx
}

/// `ZZ(η)/η` and `ZZ_sp(η)/η` for the standard Gaussian prior, with a
/// final row extrapolated linearly to `η = 0`.
pub fn gaussian_lownoise(etas: &[f64]) -> Result<Table, CliError> {
    let mut t = Table::new(&["eta", "kind", "zz_over_eta", "zz_sp_over_eta", "target_zz", "target_zz_sp"]);
    let g = ScalarPrior::gaussian(0.0, 1.0).expect("valid");
    let opts = BoundOptions::default();
    let vals: Vec<(f64, f64)> = etas
        .par_iter()
        .map(|&eta| {
            let ch = AwgnChannel::new(eta).map_err(core)?;
            let zz = bound(&g, &ch, 2, Family::ZzPlain, &opts).map_err(core)?.value;
            let sp = bound(&g, &ch, 2, Family::ZzSinglePoint, &opts).map_err(core)?.value;
            Ok((zz / eta, sp / eta))
        })
        .collect::<Result<_, CliError>>()?;
    let gamma = gamma_constant();
    for (&eta, &(a, b)) in etas.iter().zip(&vals) {
        t.rows.push(vec![num(eta), "computed".into(), num(a), num(b), num(1.0), num(gamma)]);
    }
    if etas.len() >= 2 {
        let a: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let b: Vec<f64> = vals.iter().map(|v| v.1).collect();
        t.rows.push(vec!["0".into(), "extrapolated".into(), num(intercept(etas, &a)), num(intercept(etas, &b)), num(1.0), num(gamma)]);
    }
    Ok(t)
}

/// High-noise bounds of the two-interval prior as `M` grows.
pub fn example3_limits(ms: &[usize]) -> Result<Table, CliError> {
    let mut t = Table::new(&["M", "v_bar", "v", "v_bar_limit", "v_limit", "v_bar_rel_gap", "v_rel_gap"]);
    let p = two_interval_prior();
    let out: Vec<HighNoiseBounds> = ms.par_iter().map(|&m| hn(&p, m)).collect::<Result<_, _>>()?;
    let (lb, lv) = (5.0 / 24.0, 71.0 / 384.0);
    for (&m, b) in ms.iter().zip(out) {
        t.rows.push(vec![
            m.to_string(),
            num(b.v_bar),
            num(b.v),
            num(lb),
            num(lv),
            num((b.v_bar - lb).abs() / lb),
            num((b.v - lv).abs() / lv),
        ]);
    }
    Ok(t)
}

/// The full default table for `target`.
pub fn build(target: Target) -> Result<Table, CliError> {
    match target {
        Target::Table1 => table1(&[2, 3, 4, 64]),
        Target::Fig3 => fig3(&[1.0, 1.5, 2.5, 3.0], &fig3_omegas()),
        Target::Bernoulli => bernoulli(&(1..=19).map(|k| k as f64 * 0.05).collect::<Vec<_>>()),
        Target::GaussianLownoise => gaussian_lownoise(&[1e-2, 1e-3, 1e-4]),
        Target::Example3Limits => example3_limits(&[2, 3, 4, 8, 16, 32, 64]),
    }
}

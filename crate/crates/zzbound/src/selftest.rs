//! Quick invariant suite shipped with the binary.

use rand::Rng;

use zzbound_core::asymptotic::{gamma_constant, high_noise_bounds};
use zzbound_core::baseline::{mmse, variance, OracleConfig};
use zzbound_core::numerics::{seeded_stream, suffix_max, QuadratureConfig, SearchConfig};
use zzbound_core::zz::{bound, default_grid};
use zzbound_core::{AwgnChannel, BoundOptions, Family, ScalarPrior};

pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<(bool, String), zzbound_core::Error>;

fn close(got: f64, want: f64, tol: f64) -> (bool, String) {
    ((got - want).abs() <= tol, format!("got {got:.6}, want {want:.6} ± {tol:e}"))
}

fn valley_fill() -> Result<(bool, String), zzbound_core::Error> {
    let mut rng = seeded_stream(11, 0);
    for _ in 0..200 {
        let n = rng.gen_range(1..40);
        let s: Vec<(f64, f64)> = (0..n).map(|i| (i as f64, rng.gen_range(-1.0..1.0))).collect();
        let once = suffix_max(&s)?;
        let ok = suffix_max(&once)? == once
            && once.iter().zip(&s).all(|(a, b)| a.1 >= b.1)
            && once.windows(2).all(|w| w[0].1 >= w[1].1);
        if !ok {
            return Ok((false, "suffix max not idempotent, dominating and monotone".into()));
        }
    }
    Ok((true, String::new()))
}

fn hn(p: &ScalarPrior, m: usize) -> zzbound_core::Result<zzbound_core::asymptotic::HighNoiseBounds> {
    high_noise_bounds(p, m, &default_grid(p, None, m, 512), &SearchConfig::default(), &QuadratureConfig::default())
}

fn uniform_table() -> Result<(bool, String), zzbound_core::Error> {
    let b = hn(&ScalarPrior::uniform(0.0, 1.0)?, 2)?;
    let (a, da) = close(b.v_bar, 1.0 / 12.0, 1e-3);
    let (c, dc) = close(b.v_sp, 2.0 / 27.0, 1e-3);
    Ok((a && c, format!("{da}; {dc}")))
}

fn bernoulli() -> Result<(bool, String), zzbound_core::Error> {
    let b = hn(&ScalarPrior::bernoulli(0.3)?, 2)?;
    let (a, da) = close(b.v_bar, 0.075, 5e-4);
    let (c, dc) = close(b.v_sp, 0.15, 5e-4);
    Ok((a && c && b.v.abs() < 1e-9, format!("{da}; {dc}; plain {}", b.v)))
}

fn gaussian() -> Result<(bool, String), zzbound_core::Error> {
    let g = ScalarPrior::gaussian(0.0, 1.0)?;
    let ch = AwgnChannel::new(1.0)?;
    let opts = BoundOptions { n_points: 256, ..BoundOptions::default() };
    let zz = bound(&g, &ch, 2, Family::ZzPlain, &opts)?.value;
    let sp = bound(&g, &ch, 2, Family::ZzSinglePoint, &opts)?.value;
    let (a, da) = close(zz, 0.5, 1e-3);
    let (c, dc) = close(sp, gamma_constant() / 2.0, 2e-3);
    Ok((a && c, format!("{da}; {dc}")))
}

fn monotone_in_m() -> Result<(bool, String), zzbound_core::Error> {
    let p = ScalarPrior::piecewise_uniform(vec![(0.0, 0.5), (1.0, 1.5)], vec![1.0, 1.0])?;
    let v: Vec<f64> = [2, 3, 4, 8].iter().map(|&m| hn(&p, m).map(|b| b.v)).collect::<Result<_, _>>()?;
    Ok((v.windows(2).all(|w| w[1] >= w[0] - 1e-3), format!("{v:?}")))
}

fn mmse_dominates() -> Result<(bool, String), zzbound_core::Error> {
    let p = ScalarPrior::uniform(0.0, 1.0)?;
    let ch = AwgnChannel::new(0.1)?;
    let m = mmse(&p, &ch, &OracleConfig::default())?.value;
    let opts = BoundOptions { n_points: 256, ..BoundOptions::default() };
    let b = bound(&p, &ch, 2, Family::ZzValley, &opts)?.value;
    Ok((m >= b && m <= variance(&p), format!("mmse {m:.6}, bound {b:.6}")))
}

fn channel_monotone() -> Result<(bool, String), zzbound_core::Error> {
    let mut prev = 0.0;
    for k in 0..30 {
        let e = AwgnChannel::new(10f64.powf(-3.0 + 0.3 * k as f64))?.binary_error_closed_form(1.0, 0.4)?;
        if e < prev {
            return Ok((false, format!("error decreased at step {k}")));
        }
        prev = e;
    }
    Ok((true, String::new()))
}

const CHECKS: [(&str, Check); 7] = [
    ("valley fill", valley_fill),
    ("uniform high-noise bounds", uniform_table),
    ("bernoulli high-noise bounds", bernoulli),
    ("gaussian closed forms", gaussian),
    ("monotone in M", monotone_in_m),
    ("mmse dominates", mmse_dominates),
    ("channel error monotone in eta", channel_monotone),
];

pub fn run_all() -> Vec<Outcome> {
    CHECKS
        .iter()
        .map(|(name, f)| match f() {
            Ok((passed, detail)) => Outcome { name, passed, detail },
            Err(e) => Outcome { name, passed: false, detail: e.to_string() },
        })
        .collect()
}

//! Regenerates the bundled synthetic data under `data/`.
//!
//! Both populations follow a common-plus-specific log-linear factor
//! structure with Poisson deaths, over 1950-2009 and ages 25-95.
//!
//! Usage: `cargo run -p depbounds --example make_fixtures -- <data dir>`

use std::path::PathBuf;

use depbounds::mortality::synthetic::rates_table_with;
use depbounds::mortality::{ModelParams, RandomWalkSpec, TimeSeriesKind, TimeSeriesParams};
use depbounds::scenario::{write_mortality_csv, write_params, FittedModels};
use depbounds::Seed;

const AGES: std::ops::RangeInclusive<u32> = 25..=95;
const YEARS: std::ops::RangeInclusive<i32> = 1950..=2009;

fn normalized(raw: impl Fn(f64) -> f64) -> impl Fn(u32) -> f64 {
    let total: f64 = AGES.map(|a| raw(a as f64)).sum();
    move |x| raw(x as f64) / total
}

fn main() -> depbounds::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    let common_beta = normalized(|x| {
        let u = (x - 25.0) / 70.0;
        1.2 - 0.5 * u + 0.15 * u * u
    });
    let common_kappa = |t: i32| -1.7 * (t - 1980) as f64 + 2.5 * (0.37 * t as f64).sin();
    let exposure_shape =
        |t: i32, x: u32| (-((x as f64 - 25.0) / 50.0).powi(2)).exp() * (1.0 + 0.003 * (t - 1950) as f64);

    let ew_beta = normalized(|x| 0.3 + (x - 25.0) / 70.0);
    let ew_kappa = |t: i32| -0.25 * (t - 1980) as f64 + 1.5 * (0.5 * t as f64).cos() + (1.3 * t as f64).sin();
    let ew = rates_table_with(
        "EW",
        YEARS,
        AGES,
        |t, x| (4e5 * exposure_shape(t, x)).round(),
        Some(Seed(20_090_001)),
        |t, x| {
            ((6e-4f64).ln() + 0.085 * (x as f64 - 25.0) + common_beta(x) * common_kappa(t) + ew_beta(x) * ew_kappa(t))
                .exp()
        },
    )?;

    let us_beta = normalized(|x| 1.3 - (x - 25.0) / 70.0);
    let us_kappa = |t: i32| 0.15 * (t - 1980) as f64 + 1.2 * (0.83 * t as f64).sin();
    let us = rates_table_with(
        "US",
        YEARS,
        AGES,
        |t, x| (2.5e6 * exposure_shape(t, x)).round(),
        Some(Seed(20_090_002)),
        |t, x| {
            ((9e-4f64).ln() + 0.08 * (x as f64 - 25.0) + common_beta(x) * common_kappa(t) + us_beta(x) * us_kappa(t))
                .exp()
        },
    )?;
    write_mortality_csv(&ew, dir.join("ew_synthetic.csv"))?;
    write_mortality_csv(&us, dir.join("us_synthetic.csv"))?;

    // Log-normal index marginals calibrated so that Clayton dependence puts
    // the countermonotone crossing inside the Kortis layer and the
    // comonotone crossing above it.
    let lognormal = |id: &str, alpha, omega, median: f64, log_sd: f64| {
        let steps = 7.0f64;
        ModelParams::TimeSeries(TimeSeriesParams {
            kind: TimeSeriesKind::Lognormal,
            population_id: id.into(),
            alpha,
            omega,
            horizon: 8,
            years: vec![2001],
            y: vec![median],
            start: median,
            walk: RandomWalkSpec {
                drift: 0.0,
                sigma: log_sd / steps.sqrt(),
                correlation: None,
            },
        })
    };
    write_params(
        &FittedModels {
            population1: lognormal("EW", 75, 85, 0.067, 0.54),
            population2: lognormal("US", 55, 65, 0.0228, 0.58),
        },
        dir.join("kortis_lognormal.json"),
    )?;
    Ok(())
}

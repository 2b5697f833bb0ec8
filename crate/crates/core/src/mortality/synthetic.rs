//! Synthetic deaths/exposure tables with known generating rates.

use std::ops::RangeInclusive;

use rand::Rng;
use rand_distr::Poisson;

use super::table::MortalityTable;
use crate::error::{Error, Result};
use crate::rng::Seed;

/// Table with constant exposure and deaths `rate(t, x) * exposure`, or
/// Poisson draws with that mean when `noise` is given.
pub fn rates_table(
    population_id: &str,
    years: RangeInclusive<i32>,
    ages: RangeInclusive<u32>,
    exposure: f64,
    noise: Option<Seed>,
    rate: impl Fn(i32, u32) -> f64,
) -> Result<MortalityTable> {
    rates_table_with(population_id, years, ages, |_, _| exposure, noise, rate)
}

/// As [`rates_table`] with a cell-dependent exposure.
pub fn rates_table_with(
    population_id: &str,
    years: RangeInclusive<i32>,
    ages: RangeInclusive<u32>,
    exposure: impl Fn(i32, u32) -> f64,
    noise: Option<Seed>,
    rate: impl Fn(i32, u32) -> f64,
) -> Result<MortalityTable> {
    let years: Vec<i32> = years.collect();
    let ages: Vec<u32> = ages.collect();
    let mut rng = noise.map(|s| s.stream(0));
    let mut deaths = Vec::with_capacity(years.len() * ages.len());
    let mut expo = Vec::with_capacity(deaths.capacity());
    for &t in &years {
        for &x in &ages {
            let e = exposure(t, x);
            let mean = rate(t, x) * e;
            let d = match rng.as_mut() {
                Some(rng) if mean > 0.0 => {
                    let pois =
                        Poisson::new(mean).map_err(|err| Error::invalid(format!("poisson mean {mean}: {err}")))?;
                    rng.sample(pois)
                }
                _ => mean,
            };
            deaths.push(d);
            expo.push(e);
        }
    }
    MortalityTable::new(population_id, years, ages, deaths, expo)
}

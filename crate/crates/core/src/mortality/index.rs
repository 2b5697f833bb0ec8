use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cbd::cbd_rate;
use super::params::{FactorPopulation, ModelParams, TimeSeriesKind};
use super::table::MortalityTable;
use super::walk::correlated_normals;
use crate::dist::Sample;
use crate::error::{Error, Result};
use crate::rng::{par_generate, Seed};

/// Annualised average improvement of central rates over ages
/// `alpha..=omega` between `base_year` and `base_year + horizon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexDefinition {
    pub alpha: u32,
    pub omega: u32,
    pub horizon: u32,
    pub base_year: i32,
}

impl IndexDefinition {
    pub fn new(alpha: u32, omega: u32, horizon: u32, base_year: i32) -> Result<Self> {
        let idx = IndexDefinition {
            alpha,
            omega,
            horizon,
            base_year,
        };
        idx.validate()?;
        Ok(idx)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha >= self.omega {
            return Err(Error::invalid(format!(
                "index ages need alpha < omega (got {}, {})",
                self.alpha, self.omega
            )));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("index horizon must be at least 1"));
        }
        Ok(())
    }

    pub fn ages(&self) -> impl Iterator<Item = u32> {
        self.alpha..=self.omega
    }

    pub fn n_ages(&self) -> usize {
        (self.omega - self.alpha + 1) as usize
    }

    pub fn target_year(&self) -> i32 {
        self.base_year + self.horizon as i32
    }
}

/// `1 - mean((later / earlier)^(1/horizon))`.
pub fn index_value(earlier: &[f64], later: &[f64], horizon: u32) -> f64 {
    let inv = 1.0 / horizon as f64;
    let s: f64 = earlier.iter().zip(later).map(|(a, b)| (b / a).powf(inv)).sum();
    1.0 - s / earlier.len() as f64
}

/// Observed central rates at `year` over `ages`, all required positive.
pub fn observed_rates(table: &MortalityTable, year: i32, ages: impl Iterator<Item = u32>) -> Result<Vec<f64>> {
    let id = table.population_id();
    let t = table
        .year_index(year)
        .ok_or_else(|| Error::Coverage(format!("{id}: year {year} not in table")))?;
    ages.map(|age| {
        let x = table
            .age_index(age)
            .ok_or_else(|| Error::Coverage(format!("{id}: age {age} not in table")))?;
        let mu = table.rate_at(t, x);
        if mu > 0.0 && mu.is_finite() {
            Ok(mu)
        } else {
            Err(Error::invalid(format!(
                "{id}: rate at year {year}, age {age} must be positive (got {mu})"
            )))
        }
    })
    .collect()
}

/// Rate forecaster for one population, driven by a pair of standard normals.
enum Forecaster<'a> {
    Cbd {
        theta: f64,
        tau: f64,
        walks: [super::walk::RandomWalkSpec; 2],
    },
    Factor {
        pop: &'a FactorPopulation,
        ages0: u32,
        kappa: f64,
        bar_kappa: f64,
    },
}

struct Plan<'a> {
    forecaster: Forecaster<'a>,
    steps: u32,
    rho: f64,
}

impl Plan<'_> {
    fn rate(&self, age: u32, z: (f64, f64)) -> f64 {
        let h = self.steps;
        match &self.forecaster {
            Forecaster::Cbd { theta, tau, walks } => cbd_rate(
                walks[0].terminal(*theta, h, z.0),
                walks[1].terminal(*tau, h, z.1),
                age as f64,
            ),
            Forecaster::Factor {
                pop,
                ages0,
                kappa,
                bar_kappa,
            } => {
                let x = (age - ages0) as usize;
                let mut eta = pop.lambda[x] + pop.beta[x] * pop.kappa_walk.terminal(*kappa, h, z.0);
                if let (Some(bb), Some(w)) = (&pop.bar_beta, &pop.bar_kappa_walk) {
                    eta += bb[x] * w.terminal(*bar_kappa, h, z.1);
                }
                eta.exp()
            }
        }
    }
}

fn plan<'a>(params: &'a ModelParams, population_id: &str, ages: &[u32], target_year: i32) -> Result<Plan<'a>> {
    let (fit_ages, years) = match params {
        ModelParams::Cbd(c) => (&c.ages, &c.years),
        ModelParams::Factor(f) => (&f.ages, &f.years),
        ModelParams::TimeSeries(_) => return Err(Error::invalid("time-series parameters do not forecast rates")),
    };
    let last = years[years.len() - 1];
    let steps = target_year - last;
    if steps < 1 {
        return Err(Error::invalid(format!(
            "target year {target_year} must be after the last fitted year {last}"
        )));
    }
    let (lo, hi) = (fit_ages[0], fit_ages[fit_ages.len() - 1]);
    if let Some(age) = ages.iter().find(|&&a| a < lo || a > hi) {
        return Err(Error::Coverage(format!(
            "{population_id}: age {age} outside fitted ages {lo}-{hi}"
        )));
    }
    let (forecaster, rho) = match params {
        ModelParams::Cbd(c) => {
            if c.population_id != population_id {
                return Err(Error::invalid(format!(
                    "parameters fitted for {}, not {population_id}",
                    c.population_id
                )));
            }
            let n = c.theta.len() - 1;
            (
                Forecaster::Cbd {
                    theta: c.theta[n],
                    tau: c.tau[n],
                    walks: [c.theta_walk, c.tau_walk],
                },
                c.theta_walk.correlation.unwrap_or(0.0),
            )
        }
        ModelParams::Factor(f) => {
            let pop = f
                .populations
                .iter()
                .find(|p| p.population_id == population_id)
                .ok_or_else(|| Error::invalid(format!("no fitted factors for population {population_id}")))?;
            let n = pop.kappa.len() - 1;
            (
                Forecaster::Factor {
                    pop,
                    ages0: lo,
                    kappa: pop.kappa[n],
                    bar_kappa: pop.bar_kappa.as_ref().map_or(0.0, |k| k[n]),
                },
                pop.kappa_walk.correlation.unwrap_or(0.0),
            )
        }
        ModelParams::TimeSeries(_) => unreachable!(),
    };
    Ok(Plan {
        forecaster,
        steps: steps as u32,
        rho,
    })
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("number of simulations must be at least 1"));
    }
    Ok(())
}

/// Simulated central rates at `target_year` for `ages`, one row per draw in
/// draw order. Draws depend only on the seed, not on the ages requested.
pub fn simulate_rates(
    params: &ModelParams,
    population_id: &str,
    ages: &[u32],
    target_year: i32,
    n: usize,
    seed: Seed,
) -> Result<Vec<Vec<f64>>> {
    check_n(n)?;
    let plan = plan(params, population_id, ages, target_year)?;
    let rho = plan.rho;
    let z = par_generate(n, seed, move |rng| correlated_normals(rng, rho));
    Ok(z.par_iter()
        .map(|&z| ages.iter().map(|&a| plan.rate(a, z)).collect())
        .collect())
}

/// Sorted sample of the index for the table's population.
pub fn simulate_index(
    params: &ModelParams,
    table: &MortalityTable,
    idx: &IndexDefinition,
    n: usize,
    seed: Seed,
) -> Result<Sample> {
    idx.validate()?;
    check_n(n)?;
    let id = table.population_id();
    let earlier = observed_rates(table, idx.base_year, idx.ages())?;
    let values = match params {
        ModelParams::TimeSeries(ts) => {
            if ts.population_id != id {
                return Err(Error::invalid(format!(
                    "parameters fitted for {}, not {id}",
                    ts.population_id
                )));
            }
            if !ts.matches(idx) {
                return Err(Error::invalid(format!(
                    "time-series parameters were fitted for ages {}-{} and horizon {}",
                    ts.alpha, ts.omega, ts.horizon
                )));
            }
            let steps = idx.base_year - ts.last_year();
            if steps < 1 {
                return Err(Error::invalid(format!(
                    "base year {} must be after the last series year {}",
                    idx.base_year,
                    ts.last_year()
                )));
            }
            let (walk, kind, start) = (ts.walk, ts.kind, ts.start);
            par_generate(n, seed, move |rng| {
                let z = correlated_normals(rng, 0.0).0;
                match kind {
                    TimeSeriesKind::Normal => walk.terminal(start, steps as u32, z),
                    TimeSeriesKind::Lognormal => walk.terminal(start.ln(), steps as u32, z).exp(),
                }
            })
        }
        _ => {
            let ages: Vec<u32> = idx.ages().collect();
            let plan = plan(params, id, &ages, idx.target_year())?;
            let rho = plan.rho;
            let z = par_generate(n, seed, move |rng| correlated_normals(rng, rho));
            z.par_iter()
                .map_init(
                    || vec![0.0; ages.len()],
                    |later, &z| {
                        for (slot, &a) in later.iter_mut().zip(&ages) {
                            *slot = plan.rate(a, z);
                        }
                        index_value(&earlier, later, idx.horizon)
                    },
                )
                .collect()
        }
    };
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("{id}: simulated index value {v}")));
    }
    Sample::new(values)
}

use super::params::{CbdParams, ModelParams};
use super::table::MortalityTable;
use super::walk::RandomWalkSpec;
use crate::error::{Error, Result};

/// Central rate implied by the logit-linear predictor.
pub fn cbd_rate(theta: f64, tau: f64, age: f64) -> f64 {
    (theta + age * tau).exp().ln_1p()
}

/// Logit of the one-year death probability `q = 1 - exp(-mu)`.
pub(crate) fn logit_q(mu: f64) -> f64 {
    (-(-mu).exp_m1()).ln() + mu
}

/// Per-year OLS of `logit q` on age, then random walks on the two series.
pub fn fit_cbd(table: &MortalityTable) -> Result<ModelParams> {
    let id = table.population_id();
    if table.n_ages() < 3 || table.n_years() < 3 {
        return Err(Error::invalid(format!(
            "{id}: cbd fit needs at least 3 ages and 3 years"
        )));
    }
    let ages: Vec<f64> = table.ages().iter().map(|&a| a as f64).collect();
    let xbar = ages.iter().sum::<f64>() / ages.len() as f64;
    let sxx: f64 = ages.iter().map(|x| (x - xbar).powi(2)).sum();
    let mut theta = Vec::with_capacity(table.n_years());
    let mut tau = Vec::with_capacity(table.n_years());
    for t in 0..table.n_years() {
        let mut y = Vec::with_capacity(ages.len());
        for x in 0..ages.len() {
            let mu = table.rate_at(t, x);
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::invalid(format!(
                    "{id}: cbd fit needs positive rates, got {mu} at year {}, age {}",
                    table.years()[t],
                    table.ages()[x]
                )));
            }
            y.push(logit_q(mu));
        }
        let ybar = y.iter().sum::<f64>() / y.len() as f64;
        let sxy: f64 = ages.iter().zip(&y).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
        let slope = sxy / sxx;
        tau.push(slope);
        theta.push(ybar - slope * xbar);
    }
    let (theta_walk, tau_walk) = RandomWalkSpec::estimate_pair(&theta, &tau)?;
    Ok(ModelParams::Cbd(CbdParams {
        population_id: id.to_string(),
        ages: table.ages().to_vec(),
        years: table.years().to_vec(),
        theta,
        tau,
        theta_walk,
        tau_walk,
    }))
}

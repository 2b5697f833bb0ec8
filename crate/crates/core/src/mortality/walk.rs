use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dist::Sample;
use crate::error::{Error, Result};
use crate::rng::{par_generate, Seed};

/// Random walk with drift: `x_{t+1} = x_t + drift + sigma * Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomWalkSpec {
    pub drift: f64,
    pub sigma: f64,
    /// Correlation of increments with the companion walk, when there is one.
    pub correlation: Option<f64>,
}

impl RandomWalkSpec {
    pub fn new(drift: f64, sigma: f64, correlation: Option<f64>) -> Result<Self> {
        let spec = RandomWalkSpec {
            drift,
            sigma,
            correlation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.drift.is_finite() || !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "random walk needs finite drift and sigma >= 0 (got {}, {})",
                self.drift, self.sigma
            )));
        }
        if let Some(rho) = self.correlation {
            if !(-1.0..=1.0).contains(&rho) {
                return Err(Error::invalid(format!("correlation {rho} outside [-1, 1]")));
            }
        }
        Ok(())
    }

    /// Drift and volatility from the first differences of `series`
    /// (mean and sample standard deviation).
    pub fn estimate(series: &[f64]) -> Result<Self> {
        let d = increments(series)?;
        let drift = mean(&d);
        let sigma = if d.len() > 1 {
            (d.iter().map(|x| (x - drift).powi(2)).sum::<f64>() / (d.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        RandomWalkSpec::new(drift, sigma, None)
    }

    /// Two walks sharing the sample correlation of their increments.
    pub fn estimate_pair(a: &[f64], b: &[f64]) -> Result<(Self, Self)> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let (mut wa, mut wb) = (Self::estimate(a)?, Self::estimate(b)?);
        let (da, db) = (increments(a)?, increments(b)?);
        let rho = if wa.sigma > 0.0 && wb.sigma > 0.0 && da.len() > 1 {
            let (ma, mb) = (mean(&da), mean(&db));
            let cov = da.iter().zip(&db).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (da.len() - 1) as f64;
            (cov / (wa.sigma * wb.sigma)).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        wa.correlation = Some(rho);
        wb.correlation = Some(rho);
        Ok((wa, wb))
    }

    /// Value after `horizon` steps from `start` given a standard normal draw.
    pub fn terminal(&self, start: f64, horizon: u32, z: f64) -> f64 {
        let h = horizon as f64;
        start + h * self.drift + self.sigma * h.sqrt() * z
    }

    pub fn with_zero_volatility(self) -> Self {
        RandomWalkSpec { sigma: 0.0, ..self }
    }
}

fn increments(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::invalid("random walk estimation needs at least two observations"));
    }
    Ok(series.windows(2).map(|w| w[1] - w[0]).collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `n` terminal values of the walk after `horizon` steps, sorted.
pub fn forecast_random_walk(spec: &RandomWalkSpec, start: f64, horizon: u32, n: usize, seed: Seed) -> Result<Sample> {
    spec.validate()?;
    check_run(horizon, n)?;
    let spec = *spec;
    let draws = par_generate(n, seed, move |rng| {
        spec.terminal(start, horizon, rng.sample(StandardNormal))
    });
    Sample::new(draws)
}

/// Aligned terminal values of two walks whose increments are correlated by
/// `first.correlation` (0 when absent).
pub fn forecast_random_walk_pair(
    first: &RandomWalkSpec,
    second: &RandomWalkSpec,
    start: (f64, f64),
    horizon: u32,
    n: usize,
    seed: Seed,
) -> Result<(Vec<f64>, Vec<f64>)> {
    first.validate()?;
    second.validate()?;
    check_run(horizon, n)?;
    let (a, b) = (*first, *second);
    let rho = a.correlation.unwrap_or(0.0);
    let draws = par_generate(n, seed, move |rng| {
        let (z1, z2) = correlated_normals(rng, rho);
        (a.terminal(start.0, horizon, z1), b.terminal(start.1, horizon, z2))
    });
    Ok(draws.into_iter().unzip())
}

pub(crate) fn correlated_normals<R: Rng + ?Sized>(rng: &mut R, rho: f64) -> (f64, f64) {
    let z1: f64 = rng.sample(StandardNormal);
    let e: f64 = rng.sample(StandardNormal);
    (z1, rho * z1 + (1.0 - rho * rho).sqrt() * e)
}

fn check_run(horizon: u32, n: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::invalid("forecast horizon must be at least 1"));
    }
    if n == 0 {
        return Err(Error::invalid("number of simulations must be at least 1"));
    }
    Ok(())
}

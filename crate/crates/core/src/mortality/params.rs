use serde::{Deserialize, Serialize};

use super::index::IndexDefinition;
use super::walk::RandomWalkSpec;
use crate::error::{Error, Result};

/// Factor model family fitted by Poisson maximum likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    LeeCarter,
    LiLee,
    Cae,
}

impl FactorKind {
    pub fn populations(self) -> usize {
        match self {
            FactorKind::LeeCarter => 1,
            FactorKind::LiLee | FactorKind::Cae => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FactorKind::LeeCarter => "lee_carter",
            FactorKind::LiLee => "li_lee",
            FactorKind::Cae => "cae",
        }
    }
}

/// Index time-series family: the level (normal) or its logarithm
/// (log-normal) follows a random walk with drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSeriesKind {
    Normal,
    Lognormal,
}

impl TimeSeriesKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeSeriesKind::Normal => "normal",
            TimeSeriesKind::Lognormal => "lognormal",
        }
    }
}

/// Two-factor logit model: `mu = ln(1 + exp(theta_t + x * tau_t))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbdParams {
    pub population_id: String,
    pub ages: Vec<u32>,
    pub years: Vec<i32>,
    pub theta: Vec<f64>,
    pub tau: Vec<f64>,
    /// Carries the theta/tau increment correlation.
    pub theta_walk: RandomWalkSpec,
    pub tau_walk: RandomWalkSpec,
}

/// One population's view of a fitted factor model:
/// `ln mu = lambda_x + beta_x kappa_t (+ bar_beta_x bar_kappa_t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorPopulation {
    pub population_id: String,
    pub lambda: Vec<f64>,
    pub beta: Vec<f64>,
    pub kappa: Vec<f64>,
    /// Carries the kappa/bar_kappa increment correlation when both exist.
    pub kappa_walk: RandomWalkSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bar_beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bar_kappa: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bar_kappa_walk: Option<RandomWalkSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorParams {
    pub kind: FactorKind,
    pub ages: Vec<u32>,
    pub years: Vec<i32>,
    pub populations: Vec<FactorPopulation>,
    pub iterations: usize,
    pub log_likelihood: f64,
}

/// Random walk on the index series itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesParams {
    pub kind: TimeSeriesKind,
    pub population_id: String,
    pub alpha: u32,
    pub omega: u32,
    pub horizon: u32,
    /// Years `t` of the historical series (each uses rates at `t` and `t + horizon`).
    pub years: Vec<i32>,
    pub y: Vec<f64>,
    /// Level at the last historical year.
    pub start: f64,
    /// Walk on `y` (normal) or `ln y` (log-normal).
    pub walk: RandomWalkSpec,
}

impl TimeSeriesParams {
    pub fn last_year(&self) -> i32 {
        self.years[self.years.len() - 1]
    }

    pub fn matches(&self, idx: &IndexDefinition) -> bool {
        self.alpha == idx.alpha && self.omega == idx.omega && self.horizon == idx.horizon
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    Cbd(CbdParams),
    Factor(FactorParams),
    TimeSeries(TimeSeriesParams),
}

impl ModelParams {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelParams::Cbd(_) => "cbd",
            ModelParams::Factor(f) => f.kind.as_str(),
            ModelParams::TimeSeries(t) => t.kind.as_str(),
        }
    }

    pub fn population_ids(&self) -> Vec<&str> {
        match self {
            ModelParams::Cbd(c) => vec![c.population_id.as_str()],
            ModelParams::Factor(f) => f.populations.iter().map(|p| p.population_id.as_str()).collect(),
            ModelParams::TimeSeries(t) => vec![t.population_id.as_str()],
        }
    }

    /// Same parameters with every random-walk volatility set to zero.
    pub fn with_zero_volatility(&self) -> Self {
        let mut p = self.clone();
        match &mut p {
            ModelParams::Cbd(c) => {
                c.theta_walk = c.theta_walk.with_zero_volatility();
                c.tau_walk = c.tau_walk.with_zero_volatility();
            }
            ModelParams::Factor(f) => {
                for pop in &mut f.populations {
                    pop.kappa_walk = pop.kappa_walk.with_zero_volatility();
                    pop.bar_kappa_walk = pop.bar_kappa_walk.map(RandomWalkSpec::with_zero_volatility);
                }
            }
            ModelParams::TimeSeries(t) => t.walk = t.walk.with_zero_volatility(),
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::invalid(format!("model parameters: {what}")));
        match self {
            ModelParams::Cbd(c) => {
                if c.ages.is_empty() || c.years.len() != c.theta.len() || c.years.len() != c.tau.len() {
                    return bad("cbd series lengths do not match the year grid");
                }
                c.theta_walk.validate()?;
                c.tau_walk.validate()
            }
            ModelParams::Factor(f) => {
                if f.populations.len() != f.kind.populations() {
                    return bad("wrong number of populations for the factor kind");
                }
                for p in &f.populations {
                    let (na, ny) = (f.ages.len(), f.years.len());
                    let two = f.kind != FactorKind::LeeCarter;
                    if p.lambda.len() != na || p.beta.len() != na || p.kappa.len() != ny {
                        return bad("factor vectors do not match the age/year grid");
                    }
                    match (&p.bar_beta, &p.bar_kappa, &p.bar_kappa_walk) {
                        (Some(b), Some(k), Some(w)) if two => {
                            if b.len() != na || k.len() != ny {
                                return bad("common factor vectors do not match the grid");
                            }
                            w.validate()?;
                        }
                        (None, None, None) if !two => {}
                        _ => return bad("common factor presence does not match the kind"),
                    }
                    p.kappa_walk.validate()?;
                }
                Ok(())
            }
            ModelParams::TimeSeries(t) => {
                if t.years.is_empty() || t.years.len() != t.y.len() || t.alpha >= t.omega || t.horizon == 0 {
                    return bad("time-series definition is inconsistent");
                }
                t.walk.validate()
            }
        }
    }
}

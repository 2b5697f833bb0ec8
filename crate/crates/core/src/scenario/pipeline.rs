use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ModelKind, ScenarioConfig, SweepConfig};
use super::data::{load_mortality_csv, read_params, FittedModels, MarginalSamples};
use crate::copula::{difference, extreme_transform, rank_reorder, sample_copula, CopulaSpec, ExtremeKind};
use crate::crossing::{
    bound_regime, crossing_order, default_band, detect_crossings, x_tolerance, BoundRegime, CrossingOrder,
    CrossingTriple,
};
use crate::dist::{EmpiricalDist, Sample};
use crate::error::{Error, Result};
use crate::layer::{expected_layer_payoff, uncertainty_spread, LayerSpec, SpreadReport};
use crate::mortality::{
    fit_cbd, fit_factor_model, fit_timeseries, simulate_index, FactorKind, IndexDefinition, ModelParams, MortalityTable,
};
use crate::rng::Seed;

/// One population's windowed table and index definition.
#[derive(Debug, Clone)]
pub struct PopulationData {
    pub id: String,
    pub model: ModelKind,
    pub table: MortalityTable,
    pub index: IndexDefinition,
}

pub fn load_populations(cfg: &ScenarioConfig) -> Result<[PopulationData; 2]> {
    let w = &cfg.window;
    let load = |k: usize| -> Result<PopulationData> {
        let p = &cfg.populations[k];
        let table = load_mortality_csv(&p.data, &p.id)?.restrict(w.first_year, w.last_year, w.min_age, w.max_age)?;
        Ok(PopulationData {
            id: p.id.clone(),
            model: p.model,
            table,
            index: cfg.index(k)?,
        })
    };
    Ok([load(0)?, load(1)?])
}

fn context(id: &str, model: ModelKind) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Invalid(m) => Error::Invalid(format!("{id} ({model}): {m}")),
        Error::Numerical(m) => Error::Numerical(format!("{id} ({model}): {m}")),
        other => other,
    }
}

/// Fits each population's marginal model; two-population kinds are fitted
/// once on both tables. Uses the configured parameter file instead when set.
pub fn fit_models(cfg: &ScenarioConfig, pops: &[PopulationData; 2]) -> Result<FittedModels> {
    if let Some(path) = &cfg.params {
        let models = read_params(path)?;
        for (k, pop) in pops.iter().enumerate() {
            if !models.get(k).population_ids().contains(&pop.id.as_str()) {
                return Err(Error::invalid(format!(
                    "parameter file {} has no model for population {}",
                    path.display(),
                    pop.id
                )));
            }
        }
        return Ok(models);
    }
    let mut joint: BTreeMap<&'static str, ModelParams> = BTreeMap::new();
    let mut fitted = Vec::with_capacity(2);
    for pop in pops {
        let ctx = context(&pop.id, pop.model);
        let params = match pop.model {
            ModelKind::Cbd => fit_cbd(&pop.table).map_err(ctx)?,
            ModelKind::Normal | ModelKind::Lognormal => {
                fit_timeseries(&pop.table, &pop.index, pop.model.timeseries_kind().unwrap()).map_err(ctx)?
            }
            ModelKind::LeeCarter => fit_factor_model(&[&pop.table], FactorKind::LeeCarter).map_err(ctx)?,
            ModelKind::LiLee | ModelKind::Cae => {
                let kind = pop.model.factor_kind().unwrap();
                match joint.get(kind.as_str()) {
                    Some(p) => p.clone(),
                    None => {
                        let p = fit_factor_model(&[&pops[0].table, &pops[1].table], kind).map_err(ctx)?;
                        joint.insert(kind.as_str(), p.clone());
                        p
                    }
                }
            }
        };
        fitted.push(params);
    }
    let population2 = fitted.pop().unwrap();
    let population1 = fitted.pop().unwrap();
    Ok(FittedModels {
        population1,
        population2,
    })
}

/// Keyed by population id, so a population listed twice gets identical
/// marginal draws. Joint structure comes from rank reordering only, so
/// sharing a stream between different populations is harmless.
pub fn population_seed(seed: Seed, population_id: &str) -> Seed {
    seed.derive(fnv1a(format!("population:{population_id}").as_bytes()))
}

/// Copula draws depend on the label only, not on the position in the list.
pub fn copula_seed(seed: Seed, spec: &CopulaSpec) -> Seed {
    seed.derive(fnv1a(format!("copula:{}", spec.label()).as_bytes()))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Order-sensitive checksum of the bit patterns of `values`.
pub fn checksum(values: &[f64]) -> u64 {
    values
        .iter()
        .fold(0xcbf2_9ce4_8422_2325, |h, v| fnv1a_step(h, v.to_bits()))
}

fn fnv1a_step(h: u64, word: u64) -> u64 {
    word.to_le_bytes()
        .iter()
        .fold(h, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

pub fn simulate_marginals(
    cfg: &ScenarioConfig,
    models: &FittedModels,
    pops: &[PopulationData; 2],
) -> Result<MarginalSamples> {
    let sim = |k: usize| {
        let pop = &pops[k];
        simulate_index(
            models.get(k),
            &pop.table,
            &pop.index,
            cfg.sims,
            population_seed(cfg.seed, &pop.id),
        )
        .map_err(context(&pop.id, pop.model))
    };
    Ok(MarginalSamples {
        first: sim(0)?,
        second: sim(1)?,
    })
}

/// Analysis of one dependence structure.
#[derive(Debug, Clone, Serialize)]
pub struct CopulaResult {
    pub copula: CopulaSpec,
    pub median_i: f64,
    pub crossings: CrossingTriple,
    pub n_c: usize,
    pub n_cm: usize,
    /// `None` unless all three crossings are unique.
    pub order: Option<CrossingOrder>,
    pub regime: BoundRegime,
    pub e_i: f64,
    /// Sorted sample of `I` under this copula.
    #[serde(skip)]
    pub sample: Sample,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    #[serde(skip)]
    pub models: Option<FittedModels>,
    pub layer: LayerSpec,
    pub band: f64,
    pub x_tolerance: f64,
    pub sweep: SweepConfig,
    pub cdf_points: usize,
    pub marginal_checksum: u64,
    pub median_ic: f64,
    pub median_icm: f64,
    pub d_star: Option<f64>,
    pub n_star: usize,
    pub e_ic: f64,
    pub e_icm: f64,
    pub spread: SpreadReport,
    #[serde(skip)]
    pub comonotone: Sample,
    #[serde(skip)]
    pub countermonotone: Sample,
    /// Difference under independence, used for the spread-bar anchors.
    #[serde(skip)]
    pub independence: Sample,
    pub rows: Vec<CopulaResult>,
}

/// Reorders the same marginal samples under every configured copula and
/// analyses crossings and layer payoffs.
pub fn analyze(cfg: &ScenarioConfig, samples: &MarginalSamples) -> Result<ScenarioReport> {
    let (first, second) = (&samples.first, &samples.second);
    if first.len() != second.len() {
        return Err(Error::LengthMismatch {
            left: first.len(),
            right: second.len(),
        });
    }
    let n = first.len();
    let band = cfg.band.unwrap_or_else(|| default_band(n));
    let sums = (checksum(first.values()), checksum(second.values()));
    let comonotone = difference(&extreme_transform(first, second, ExtremeKind::Comonotone)?);
    let countermonotone = difference(&extreme_transform(first, second, ExtremeKind::Countermonotone)?);
    let xtol = x_tolerance(&countermonotone, band);
    let dist_c = EmpiricalDist::new(comonotone.clone());
    let dist_cm = EmpiricalDist::new(countermonotone.clone());
    let cs_star = detect_crossings(&dist_c, &dist_cm, band)?;
    let layer = cfg.layer;

    let reorder = |spec: &CopulaSpec| -> Result<Sample> {
        let u = sample_copula(spec, n, copula_seed(cfg.seed, spec))?;
        let pairs = rank_reorder(first, second, &u)?;
        let mut a = pairs.first().to_vec();
        let mut b = pairs.second().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        if (checksum(&a), checksum(&b)) != sums {
            return Err(Error::Numerical(format!(
                "{spec}: reordered sample does not reuse the shared marginals"
            )));
        }
        Ok(difference(&pairs))
    };

    let rows = cfg
        .copulas
        .par_iter()
        .map(|spec| -> Result<CopulaResult> {
            let sample = reorder(spec)?;
            let dist = EmpiricalDist::new(sample.clone());
            let cs_c = detect_crossings(&dist_c, &dist, band)?;
            let cs_cm = detect_crossings(&dist, &dist_cm, band)?;
            let crossings = CrossingTriple::from_sets(&cs_c, &cs_cm, &cs_star);
            let order = if crossings.is_complete() {
                Some(crossing_order(&crossings, xtol)?)
            } else {
                None
            };
            Ok(CopulaResult {
                copula: *spec,
                median_i: sample.median(),
                crossings,
                n_c: cs_c.n_crossings(),
                n_cm: cs_cm.n_crossings(),
                order,
                regime: bound_regime(&cs_c, &cs_cm, &layer),
                e_i: expected_layer_payoff(&sample, &layer),
                sample,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let independence = match rows.iter().find(|r| r.copula == CopulaSpec::Independence) {
        Some(r) => r.sample.clone(),
        None => reorder(&CopulaSpec::Independence)?,
    };
    let spread = uncertainty_spread(&countermonotone, &comonotone, &layer);
    Ok(ScenarioReport {
        models: None,
        layer,
        band,
        x_tolerance: xtol,
        sweep: cfg.sweep,
        cdf_points: cfg.cdf_points,
        marginal_checksum: sums.0 ^ sums.1.rotate_left(1),
        median_ic: comonotone.median(),
        median_icm: countermonotone.median(),
        d_star: cs_star.unique(),
        n_star: cs_star.n_crossings(),
        e_ic: spread.e_c,
        e_icm: spread.e_cm,
        spread,
        comonotone,
        countermonotone,
        independence,
        rows,
    })
}

/// Fit, simulate and analyse in one pass.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let pops = load_populations(cfg)?;
    let models = fit_models(cfg, &pops)?;
    let samples = simulate_marginals(cfg, &models, &pops)?;
    let mut report = analyze(cfg, &samples)?;
    report.models = Some(models);
    Ok(report)
}

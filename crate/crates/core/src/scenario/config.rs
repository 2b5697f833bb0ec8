use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::copula::CopulaSpec;
use crate::error::{Error, Result};
use crate::layer::LayerSpec;
use crate::mortality::{FactorKind, IndexDefinition, TimeSeriesKind};
use crate::rng::Seed;

/// Marginal model selected for one population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Cbd,
    LeeCarter,
    LiLee,
    Cae,
    Normal,
    Lognormal,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Cbd,
        ModelKind::LeeCarter,
        ModelKind::LiLee,
        ModelKind::Cae,
        ModelKind::Normal,
        ModelKind::Lognormal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Cbd => "cbd",
            ModelKind::LeeCarter => "lee_carter",
            ModelKind::LiLee => "li_lee",
            ModelKind::Cae => "cae",
            ModelKind::Normal => "normal",
            ModelKind::Lognormal => "lognormal",
        }
    }

    pub fn factor_kind(self) -> Option<FactorKind> {
        match self {
            ModelKind::LeeCarter => Some(FactorKind::LeeCarter),
            ModelKind::LiLee => Some(FactorKind::LiLee),
            ModelKind::Cae => Some(FactorKind::Cae),
            _ => None,
        }
    }

    pub fn timeseries_kind(self) -> Option<TimeSeriesKind> {
        match self {
            ModelKind::Normal => Some(TimeSeriesKind::Normal),
            ModelKind::Lognormal => Some(TimeSeriesKind::Lognormal),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown model '{s}' (expected cbd, lee_carter, li_lee, cae, normal or lognormal)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    pub id: String,
    pub data: PathBuf,
    pub model: ModelKind,
    pub alpha: u32,
    pub omega: u32,
}

/// Fitting window applied to both tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub first_year: i32,
    pub last_year: i32,
    pub min_age: u32,
    pub max_age: u32,
}

impl Default for Window {
    fn default() -> Self {
        Window {
            first_year: 1950,
            last_year: 2009,
            min_age: 25,
            max_age: 95,
        }
    }
}

/// Attachment-point sweep with a fixed layer width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub min: f64,
    pub max: f64,
    pub step: f64,
    pub width: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            min: -0.15,
            max: 0.15,
            step: 0.0005,
            width: 0.005,
        }
    }
}

impl SweepConfig {
    /// Attachment points `min + k * step` up to `max`, rounded to 1e-12.
    pub fn deltas(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| ((self.min + k as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub populations: [PopulationConfig; 2],
    pub horizon: u32,
    pub base_year: i32,
    pub window: Window,
    pub copulas: Vec<CopulaSpec>,
    pub layer: LayerSpec,
    pub sims: usize,
    pub seed: Seed,
    /// Probability band for crossing detection; `None` uses the default.
    pub band: Option<f64>,
    pub out: PathBuf,
    pub sweep: SweepConfig,
    pub cdf_points: usize,
    /// Pre-fitted parameters replacing the fit step.
    pub params: Option<PathBuf>,
}

pub const DEFAULT_COPULAS: &str = "gaussian:-0.5,gaussian:0,gaussian:0.5,clayton:2,clayton:4,clayton:6";

const KEYS: &[&str] = &[
    "population1.id",
    "population1.data",
    "population1.model",
    "population1.alpha",
    "population1.omega",
    "population2.id",
    "population2.data",
    "population2.model",
    "population2.alpha",
    "population2.omega",
    "horizon",
    "base_year",
    "window.first_year",
    "window.last_year",
    "window.min_age",
    "window.max_age",
    "copulas",
    "layer.delta",
    "layer.epsilon",
    "layer.principal",
    "sims",
    "seed",
    "band",
    "out",
    "sweep.min",
    "sweep.max",
    "sweep.step",
    "sweep.width",
    "cdf.points",
    "params",
];

struct Entries<'a> {
    context: String,
    map: BTreeMap<&'a str, (usize, &'a str)>,
}

impl<'a> Entries<'a> {
    fn parse(text: &'a str, context: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                context: context.to_string(),
                line,
                message,
            };
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{body}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(format!("unknown key '{key}'")));
            }
            if map.insert(key, (line, value)).is_some() {
                return Err(err(format!("duplicate key '{key}'")));
            }
        }
        Ok(Entries {
            context: context.to_string(),
            map,
        })
    }

    fn raw(&self, key: &str) -> Option<(usize, &'a str)> {
        self.map.get(key).copied()
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((line, value)) => value.parse().map(Some).map_err(|e| Error::Parse {
                context: self.context.clone(),
                line,
                message: format!("{key}: cannot parse '{value}': {e}"),
            }),
        }
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::invalid(format!("{}: missing required key '{key}'", self.context)))
    }
}

impl ScenarioConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, &path.display().to_string())
    }

    /// Parses `key = value` lines; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path, context: &str) -> Result<Self> {
        let e = Entries::parse(text, context)?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let window = Window {
            first_year: e.get("window.first_year")?.unwrap_or(Window::default().first_year),
            last_year: e.get("window.last_year")?.unwrap_or(Window::default().last_year),
            min_age: e.get("window.min_age")?.unwrap_or(Window::default().min_age),
            max_age: e.get("window.max_age")?.unwrap_or(Window::default().max_age),
        };
        let population = |k: usize| -> Result<PopulationConfig> {
            Ok(PopulationConfig {
                id: e
                    .get(&format!("population{k}.id"))?
                    .unwrap_or_else(|| format!("population{k}")),
                data: resolve(e.require(&format!("population{k}.data"))?),
                model: e.require(&format!("population{k}.model"))?,
                alpha: e.require(&format!("population{k}.alpha"))?,
                omega: e.require(&format!("population{k}.omega"))?,
            })
        };
        let copulas = e
            .raw("copulas")
            .map_or(DEFAULT_COPULAS, |(_, v)| v)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<CopulaSpec>>>()?;
        let layer = LayerSpec::new(
            e.require("layer.delta")?,
            e.require("layer.epsilon")?,
            e.get("layer.principal")?.unwrap_or(1.0),
        )?;
        let defaults = SweepConfig::default();
        let config = ScenarioConfig {
            populations: [population(1)?, population(2)?],
            horizon: e.get("horizon")?.unwrap_or(8),
            base_year: e.get("base_year")?.unwrap_or(window.last_year),
            window,
            copulas,
            layer,
            sims: e.get("sims")?.unwrap_or(100_000),
            seed: Seed(e.get("seed")?.unwrap_or(1)),
            band: e.get("band")?,
            out: resolve(e.get("out")?.unwrap_or_else(|| PathBuf::from("out"))),
            sweep: SweepConfig {
                min: e.get("sweep.min")?.unwrap_or(defaults.min),
                max: e.get("sweep.max")?.unwrap_or(defaults.max),
                step: e.get("sweep.step")?.unwrap_or(defaults.step),
                width: e.get("sweep.width")?.unwrap_or(defaults.width),
            },
            cdf_points: e.get("cdf.points")?.unwrap_or(401),
            params: e.get::<PathBuf>("params")?.map(resolve),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Seed(seed);
        self
    }

    pub fn with_sims(mut self, sims: usize) -> Self {
        self.sims = sims;
        self
    }

    pub fn with_band(mut self, band: f64) -> Self {
        self.band = Some(band);
        self
    }

    pub fn with_out(mut self, out: PathBuf) -> Self {
        self.out = out;
        self
    }

    pub fn index(&self, population: usize) -> Result<IndexDefinition> {
        let p = &self.populations[population];
        IndexDefinition::new(p.alpha, p.omega, self.horizon, self.base_year)
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.window;
        if w.first_year >= w.last_year || w.min_age >= w.max_age {
            return Err(Error::invalid("window must span at least two years and two ages"));
        }
        for (k, p) in self.populations.iter().enumerate() {
            self.index(k)?;
            if p.alpha < w.min_age || p.omega > w.max_age {
                return Err(Error::invalid(format!(
                    "{}: index ages {}-{} outside window ages {}-{}",
                    p.id, p.alpha, p.omega, w.min_age, w.max_age
                )));
            }
            if self.params.is_none() && !p.data.is_file() {
                return Err(Error::invalid(format!(
                    "{}: data file {} not found",
                    p.id,
                    p.data.display()
                )));
            }
        }
        if self.copulas.is_empty() {
            return Err(Error::invalid("copula list is empty"));
        }
        for c in &self.copulas {
            c.validate()?;
        }
        if self.sims == 0 {
            return Err(Error::invalid("sims must be at least 1"));
        }
        if let Some(b) = self.band {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::invalid(format!("band {b} must be finite and >= 0")));
            }
        }
        let s = &self.sweep;
        if !(s.step > 0.0 && s.min < s.max && s.width > 0.0 && s.min.is_finite() && s.max.is_finite()) {
            return Err(Error::invalid("sweep needs min < max, step > 0 and width > 0"));
        }
        if self.cdf_points < 2 {
            return Err(Error::invalid("cdf.points must be at least 2"));
        }
        if let Some(p) = &self.params {
            if !p.is_file() {
                return Err(Error::invalid(format!("params file {} not found", p.display())));
            }
        }
        Ok(())
    }
}

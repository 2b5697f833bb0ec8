use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::Sample;
use crate::error::{Error, Result};
use crate::mortality::{ModelParams, MortalityTable};

/// Header of the mortality CSV schema.
pub const MORTALITY_HEADER: [&str; 4] = ["year", "age", "deaths", "exposure"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        kind => Error::Parse {
            context: path.display().to_string(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Reads a `year,age,deaths,exposure` file into a table for `population_id`.
pub fn load_mortality_csv(path: impl AsRef<Path>, population_id: &str) -> Result<MortalityTable> {
    let path = path.as_ref();
    let context = path.display().to_string();
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let missing: Vec<&str> = MORTALITY_HEADER
        .iter()
        .copied()
        .filter(|c| !header.iter().any(|h| h == *c))
        .collect();
    if !missing.is_empty() || header.len() != MORTALITY_HEADER.len() {
        return Err(Error::Parse {
            context,
            line: 1,
            message: format!(
                "header must be '{}' (missing: {})",
                MORTALITY_HEADER.join(","),
                if missing.is_empty() {
                    "none".to_string()
                } else {
                    missing.join(", ")
                }
            ),
        });
    }
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let cols = [col("year"), col("age"), col("deaths"), col("exposure")];
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let err = |message: String| Error::Parse {
            context: context.clone(),
            line,
            message,
        };
        let field = |k: usize| row.get(cols[k]).unwrap_or("");
        let year: i32 = field(0)
            .parse()
            .map_err(|_| err(format!("year '{}' is not an integer", field(0))))?;
        let age: u32 = field(1)
            .parse()
            .map_err(|_| err(format!("age '{}' is not a non-negative integer", field(1))))?;
        let number = |k: usize, name: &str| -> Result<f64> {
            field(k)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("{name} '{}' is not a finite number", field(k))))
        };
        let deaths = number(2, "deaths")?;
        let exposure = number(3, "exposure")?;
        if deaths < 0.0 {
            return Err(err(format!("negative deaths {deaths} at year {year}, age {age}")));
        }
        if exposure <= 0.0 {
            return Err(err(format!(
                "non-positive exposure {exposure} at year {year}, age {age}"
            )));
        }
        records.push((year, age, deaths, exposure));
    }
    MortalityTable::from_records(population_id, &records)
}

pub fn write_mortality_csv(table: &MortalityTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut body = format!("{}\n", MORTALITY_HEADER.join(","));
    for (t, year) in table.years().iter().enumerate() {
        for (x, age) in table.ages().iter().enumerate() {
            body.push_str(&format!(
                "{year},{age},{},{}\n",
                table.deaths_at(t, x),
                table.exposure_at(t, x)
            ));
        }
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(io_err(path))
}

/// Fitted (or calibrated) marginal models of both populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModels {
    pub population1: ModelParams,
    pub population2: ModelParams,
}

impl FittedModels {
    pub fn get(&self, population: usize) -> &ModelParams {
        if population == 0 {
            &self.population1
        } else {
            &self.population2
        }
    }
}

pub fn write_params(models: &FittedModels, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let text = serde_json::to_string_pretty(models).map_err(|e| Error::Numerical(e.to_string()))?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.write_all(b"\n"))
        .and_then(|_| w.flush())
        .map_err(io_err(path))
}

pub fn read_params(path: impl AsRef<Path>) -> Result<FittedModels> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let models: FittedModels = serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    models.population1.validate()?;
    models.population2.validate()?;
    Ok(models)
}

/// Simulated marginal index samples of both populations.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSamples {
    pub first: Sample,
    pub second: Sample,
}

pub fn write_samples(samples: &MarginalSamples, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut body = String::from("index_1,index_2\n");
    for (a, b) in samples.first.values().iter().zip(samples.second.values()) {
        body.push_str(&format!("{a},{b}\n"));
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(io_err(path))
}

pub fn read_samples(path: impl AsRef<Path>) -> Result<MarginalSamples> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = reader.headers().map_err(|e| csv_err(path, e))?;
    if header.iter().collect::<Vec<_>>() != ["index_1", "index_2"] {
        return Err(Error::Parse {
            context: path.display().to_string(),
            line: 1,
            message: "header must be 'index_1,index_2'".into(),
        });
    }
    let (mut first, mut second) = (Vec::new(), Vec::new());
    for row in reader.deserialize::<(f64, f64)>() {
        let (a, b) = row.map_err(|e| csv_err(path, e))?;
        first.push(a);
        second.push(b);
    }
    Ok(MarginalSamples {
        first: Sample::new(first)?,
        second: Sample::new(second)?,
    })
}

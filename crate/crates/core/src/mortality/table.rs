use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deaths and exposures on a dense grid of consecutive years and ages.
/// Cells are stored year-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MortalityTable {
    population_id: String,
    years: Vec<i32>,
    ages: Vec<u32>,
    deaths: Vec<f64>,
    exposure: Vec<f64>,
}

fn consecutive<T: Copy + Into<i64>>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[1].into() == w[0].into() + 1)
}

impl MortalityTable {
    pub fn new(
        population_id: impl Into<String>,
        years: Vec<i32>,
        ages: Vec<u32>,
        deaths: Vec<f64>,
        exposure: Vec<f64>,
    ) -> Result<Self> {
        let population_id = population_id.into();
        if years.is_empty() || ages.is_empty() {
            return Err(Error::invalid(format!("{population_id}: table has no cells")));
        }
        if !consecutive(&years) || !consecutive(&ages) {
            return Err(Error::invalid(format!(
                "{population_id}: years and ages must be consecutive and increasing"
            )));
        }
        let cells = years.len() * ages.len();
        if deaths.len() != cells || exposure.len() != cells {
            return Err(Error::invalid(format!(
                "{population_id}: expected {cells} cells, got {} deaths and {} exposures",
                deaths.len(),
                exposure.len()
            )));
        }
        for (k, (&d, &e)) in deaths.iter().zip(&exposure).enumerate() {
            let (year, age) = (years[k / ages.len()], ages[k % ages.len()]);
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::invalid(format!(
                    "{population_id}: deaths {d} at year {year}, age {age} must be finite and >= 0"
                )));
            }
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::invalid(format!(
                    "{population_id}: exposure {e} at year {year}, age {age} must be finite and > 0"
                )));
            }
        }
        Ok(MortalityTable {
            population_id,
            years,
            ages,
            deaths,
            exposure,
        })
    }

    /// Builds a table from `(year, age, deaths, exposure)` records in any order.
    pub fn from_records(population_id: impl Into<String>, records: &[(i32, u32, f64, f64)]) -> Result<Self> {
        let population_id = population_id.into();
        if records.is_empty() {
            return Err(Error::invalid(format!("{population_id}: no records")));
        }
        let y0 = records.iter().map(|r| r.0).min().unwrap();
        let y1 = records.iter().map(|r| r.0).max().unwrap();
        let a0 = records.iter().map(|r| r.1).min().unwrap();
        let a1 = records.iter().map(|r| r.1).max().unwrap();
        let years: Vec<i32> = (y0..=y1).collect();
        let ages: Vec<u32> = (a0..=a1).collect();
        let na = ages.len();
        let mut deaths = vec![f64::NAN; years.len() * na];
        let mut exposure = vec![f64::NAN; years.len() * na];
        for &(y, a, d, e) in records {
            let k = (y - y0) as usize * na + (a - a0) as usize;
            if !deaths[k].is_nan() {
                return Err(Error::invalid(format!(
                    "{population_id}: duplicate record for year {y}, age {a}"
                )));
            }
            deaths[k] = d;
            exposure[k] = e;
        }
        if let Some(k) = deaths.iter().position(|d| d.is_nan()) {
            return Err(Error::Coverage(format!(
                "{population_id}: missing record for year {}, age {}",
                years[k / na],
                ages[k % na]
            )));
        }
        MortalityTable::new(population_id, years, ages, deaths, exposure)
    }

    pub fn population_id(&self) -> &str {
        &self.population_id
    }

    pub fn with_population_id(mut self, id: impl Into<String>) -> Self {
        self.population_id = id.into();
        self
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn ages(&self) -> &[u32] {
        &self.ages
    }

    pub fn n_years(&self) -> usize {
        self.years.len()
    }

    pub fn n_ages(&self) -> usize {
        self.ages.len()
    }

    pub fn n_cells(&self) -> usize {
        self.deaths.len()
    }

    pub fn year_index(&self, year: i32) -> Option<usize> {
        let k = year.checked_sub(self.years[0])?;
        (k >= 0 && (k as usize) < self.years.len()).then_some(k as usize)
    }

    pub fn age_index(&self, age: u32) -> Option<usize> {
        let k = age.checked_sub(self.ages[0])? as usize;
        (k < self.ages.len()).then_some(k)
    }

    pub fn deaths_at(&self, t: usize, x: usize) -> f64 {
        self.deaths[t * self.ages.len() + x]
    }

    pub fn exposure_at(&self, t: usize, x: usize) -> f64 {
        self.exposure[t * self.ages.len() + x]
    }

    /// Crude central rate `deaths / exposure` at grid position `(t, x)`.
    pub fn rate_at(&self, t: usize, x: usize) -> f64 {
        self.deaths_at(t, x) / self.exposure_at(t, x)
    }

    pub fn crude_rate(&self, year: i32, age: u32) -> Option<f64> {
        Some(self.rate_at(self.year_index(year)?, self.age_index(age)?))
    }

    pub fn deaths(&self) -> &[f64] {
        &self.deaths
    }

    pub fn exposure(&self) -> &[f64] {
        &self.exposure
    }

    /// Sub-table over the given inclusive year and age ranges.
    pub fn restrict(&self, first_year: i32, last_year: i32, min_age: u32, max_age: u32) -> Result<Self> {
        let id = &self.population_id;
        let (t0, t1) = match (self.year_index(first_year), self.year_index(last_year)) {
            (Some(a), Some(b)) if a <= b => (a, b),
            _ => {
                return Err(Error::Coverage(format!(
                    "{id}: years {first_year}-{last_year} not inside {}-{}",
                    self.years[0],
                    self.years[self.years.len() - 1]
                )))
            }
        };
        let (x0, x1) = match (self.age_index(min_age), self.age_index(max_age)) {
            (Some(a), Some(b)) if a <= b => (a, b),
            _ => {
                return Err(Error::Coverage(format!(
                    "{id}: ages {min_age}-{max_age} not inside {}-{}",
                    self.ages[0],
                    self.ages[self.ages.len() - 1]
                )))
            }
        };
        let mut deaths = Vec::with_capacity((t1 - t0 + 1) * (x1 - x0 + 1));
        let mut exposure = Vec::with_capacity(deaths.capacity());
        for t in t0..=t1 {
            for x in x0..=x1 {
                deaths.push(self.deaths_at(t, x));
                exposure.push(self.exposure_at(t, x));
            }
        }
        MortalityTable::new(
            id.clone(),
            self.years[t0..=t1].to_vec(),
            self.ages[x0..=x1].to_vec(),
            deaths,
            exposure,
        )
    }
}

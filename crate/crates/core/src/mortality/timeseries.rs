use super::index::{index_value, observed_rates, IndexDefinition};
use super::params::{ModelParams, TimeSeriesKind, TimeSeriesParams};
use super::table::MortalityTable;
use super::walk::RandomWalkSpec;
use crate::error::{Error, Result};

/// Minimum number of historical index observations.
pub const MIN_OBSERVATIONS: usize = 5;

/// Historical index series `y_t` for every year `t` with `t + horizon` in
/// the table, so the series ends `horizon` years before the last year.
pub fn index_series(table: &MortalityTable, idx: &IndexDefinition) -> Result<(Vec<i32>, Vec<f64>)> {
    idx.validate()?;
    let years = table.years();
    let last = years[years.len() - 1];
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for &t in years.iter().take_while(|&&t| t + idx.horizon as i32 <= last) {
        let earlier = observed_rates(table, t, idx.ages())?;
        let later = observed_rates(table, t + idx.horizon as i32, idx.ages())?;
        ts.push(t);
        ys.push(index_value(&earlier, &later, idx.horizon));
    }
    Ok((ts, ys))
}

/// Random walk with drift on the index series (normal) or its logarithm
/// (log-normal).
pub fn fit_timeseries(table: &MortalityTable, idx: &IndexDefinition, kind: TimeSeriesKind) -> Result<ModelParams> {
    let id = table.population_id();
    let (years, y) = index_series(table, idx)?;
    if y.len() < MIN_OBSERVATIONS {
        return Err(Error::invalid(format!(
            "{id}: {} index observations, need at least {MIN_OBSERVATIONS}",
            y.len()
        )));
    }
    let walk = match kind {
        TimeSeriesKind::Normal => RandomWalkSpec::estimate(&y)?,
        TimeSeriesKind::Lognormal => {
            if let Some(k) = y.iter().position(|&v| v <= 0.0) {
                return Err(Error::invalid(format!(
                    "{id}: log-normal model needs a positive index, got {} in {}",
                    y[k], years[k]
                )));
            }
            let logs: Vec<f64> = y.iter().map(|v| v.ln()).collect();
            RandomWalkSpec::estimate(&logs)?
        }
    };
    Ok(ModelParams::TimeSeries(TimeSeriesParams {
        kind,
        population_id: id.to_string(),
        alpha: idx.alpha,
        omega: idx.omega,
        horizon: idx.horizon,
        start: y[y.len() - 1],
        years,
        y,
        walk,
    }))
}

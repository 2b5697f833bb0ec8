//! Stochastic mortality models: fitting from deaths/exposure tables,
//! random-walk forecasting and simulation of the mortality-improvement index.

mod cbd;
mod factor;
mod index;
mod params;
pub mod synthetic;
mod table;
mod timeseries;
mod walk;

pub use cbd::{cbd_rate, fit_cbd};
pub use factor::{fit_factor_model, MAX_SWEEPS};
pub use index::{index_value, observed_rates, simulate_index, simulate_rates, IndexDefinition};
pub use params::{
    CbdParams, FactorKind, FactorParams, FactorPopulation, ModelParams, TimeSeriesKind, TimeSeriesParams,
};
pub use table::MortalityTable;
pub use timeseries::{fit_timeseries, index_series, MIN_OBSERVATIONS};
pub use walk::{forecast_random_walk, forecast_random_walk_pair, RandomWalkSpec};

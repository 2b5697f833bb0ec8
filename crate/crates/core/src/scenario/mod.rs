//! Scenario runner: mortality CSV ingestion, flat key-value configuration,
//! the fit, simulate, reorder and analyse pipeline, and plot-ready outputs.

mod config;
mod data;
mod output;
mod pipeline;

pub use config::{ModelKind, PopulationConfig, ScenarioConfig, SweepConfig, Window, DEFAULT_COPULAS};
pub use data::{
    load_mortality_csv, read_params, read_samples, write_mortality_csv, write_params, write_samples, FittedModels,
    MarginalSamples, MORTALITY_HEADER,
};
pub use output::{
    cdf_csv, cdf_grid, emit_outputs, emit_report, emit_sweep, payoff_sweep, payoff_sweep_csv, report_csv, spread_bars,
    spread_bars_csv, SpreadBar, SweepRow, CDF_HEADER, REPORT_HEADER, SPREAD_BARS_HEADER,
};
pub use pipeline::{
    analyze, checksum, copula_seed, fit_models, load_populations, population_seed, run_scenario, simulate_marginals,
    CopulaResult, PopulationData, ScenarioReport,
};

//! Dependence bounds for layer payoffs written on a difference of two
//! random variables.
//!
//! The crate works on empirical samples throughout: marginal draws are
//! re-paired under a copula, and the comonotone and countermonotone
//! re-pairings of the same draws give the convex-order extremes of the
//! difference. Crossing points between the resulting CDFs decide when those
//! extremes bound the expected payoff of a layer.

pub mod copula;
pub mod crossing;
pub mod dist;
mod error;
pub mod layer;
pub mod mortality;
pub mod rng;
pub mod scenario;

pub use copula::{
    difference, extreme_transform, kendall_tau, rank_reorder, sample_copula, CopulaSpec, ExtremeKind, PairedSample,
    UniformPairs,
};
pub use crossing::{
    bound_regime, classify_regions, crossing_order, detect_crossings, dispersive_shortcut, symmetric_common_crossing,
    BoundRegime, CrossingOrder, CrossingSet, CrossingTriple, Direction, Interval, RegionKind, RegionLists,
    SymmetricLocationScaleSpec,
};
pub use dist::{
    dispersive_order_check, ecdf_eval, median_difference, quantile, EmpiricalDist, OrderVerdict, ProbabilityGrid,
    Sample,
};
pub use error::{Error, Result};
pub use layer::{expected_layer_payoff, layer_payoff, stop_loss, uncertainty_spread, LayerSpec, SpreadReport};
pub use mortality::{
    fit_cbd, fit_factor_model, fit_timeseries, forecast_random_walk, simulate_index, FactorKind, IndexDefinition,
    ModelParams, MortalityTable, RandomWalkSpec, TimeSeriesKind,
};
pub use rng::Seed;

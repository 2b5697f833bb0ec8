//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use depbounds::rng::par_generate;
use depbounds::scenario::load_mortality_csv;
use depbounds::{MortalityTable, Sample, Seed};
use rand::Rng;
use rand_distr::StandardNormal;

/// `n` draws of `mu + sigma * Z`.
pub fn normal_sample(n: usize, mu: f64, sigma: f64, seed: u64) -> Sample {
    let v = par_generate(n, Seed(seed), |r| mu + sigma * r.sample::<f64, _>(StandardNormal));
    Sample::new(v).unwrap()
}

/// Two marginal samples on the scale of the bundled longevity indices.
pub fn index_marginals(n: usize) -> (Sample, Sample) {
    (normal_sample(n, 0.03, 0.012, 1), normal_sample(n, 0.014, 0.006, 2))
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// One of the bundled synthetic tables (1950-2009, ages 25-95).
pub fn fixture_table(file: &str, id: &str) -> MortalityTable {
    load_mortality_csv(data_dir().join(file), id).unwrap()
}

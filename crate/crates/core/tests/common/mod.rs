#![allow(dead_code)]

use std::path::PathBuf;

use depbounds::scenario::{ModelKind, ScenarioConfig};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Kortis-style config on the bundled synthetic tables with both
/// populations under `model`; `extra` lines override or add keys.
pub fn kortis_config(model: ModelKind, sims: usize, extra: &str) -> ScenarioConfig {
    let mut text = format!(
        "population1.id = EW\npopulation1.data = ew_synthetic.csv\npopulation1.model = {model}\n\
         population1.alpha = 75\npopulation1.omega = 85\n\
         population2.id = US\npopulation2.data = us_synthetic.csv\npopulation2.model = {model}\n\
         population2.alpha = 55\npopulation2.omega = 65\n\
         horizon = 8\nbase_year = 2008\n\
         layer.delta = 0.034\nlayer.epsilon = 0.039\nlayer.principal = 1\n\
         sims = {sims}\nseed = 2008\n"
    );
    if model == ModelKind::Lognormal {
        text.push_str("params = kortis_lognormal.json\n");
    }
    text.push_str(extra);
    ScenarioConfig::parse(&text, &data_dir(), "test config").unwrap()
}

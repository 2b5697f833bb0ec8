//! Runs a scenario config once per marginal model kind and prints the
//! Table-1-shaped rows.
//!
//! Usage: `cargo run --release -p depbounds --example model_grid -- data/kortis.conf`

use std::time::Instant;

use depbounds::scenario::{run_scenario, ModelKind, ScenarioConfig};

fn main() -> depbounds::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/kortis.conf".into());
    let base = ScenarioConfig::from_file(&path)?;
    let calibrated = std::path::Path::new(&path).with_file_name("kortis_lognormal.json");
    for kind in ModelKind::ALL {
        let mut cfg = base.clone();
        for p in &mut cfg.populations {
            p.model = kind;
        }
        if kind == ModelKind::Lognormal && calibrated.is_file() {
            cfg.params = Some(calibrated.clone());
        }
        let start = Instant::now();
        let report = run_scenario(&cfg)?;
        println!(
            "{kind}: med(I^cm) {:.6} med(I^c) {:.6} d* {:?} (n* {}) [{:.1}s]",
            report.median_icm,
            report.median_ic,
            report.d_star,
            report.n_star,
            start.elapsed().as_secs_f64()
        );
        for r in &report.rows {
            println!(
                "  {:<14} med(I) {:>9.6} d^c {:>10} d^cm {:>10} n {}/{} order {:<10} regime {:<14} E {:.3e} {:.3e} {:.3e}",
                r.copula.label(),
                r.median_i,
                r.crossings.d_c.map_or("-".into(), |v| format!("{v:.6}")),
                r.crossings.d_cm.map_or("-".into(), |v| format!("{v:.6}")),
                r.n_c,
                r.n_cm,
                r.order.map_or("incomplete", |o| o.as_str()),
                r.regime.as_str(),
                report.e_ic,
                r.e_i,
                report.e_icm,
            );
        }
    }
    Ok(())
}

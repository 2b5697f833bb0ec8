use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::data::create;
use super::pipeline::ScenarioReport;
use crate::error::{Error, Result};
use crate::layer::{expected_layer_payoff, uncertainty_spread, LayerSpec};

pub const REPORT_HEADER: &str = "copula,median_i,median_ic,median_icm,d_star,d_c,d_cm,n_c,n_cm,n_star,order,regime,e_i,e_ic,e_icm,spread,spread_pct_of_max";
pub const CDF_HEADER: &str = "x,f_i,f_ic,f_icm";
pub const SPREAD_BARS_HEADER: &str = "anchor,delta,epsilon,e_ic,e_icm,spread,spread_pct_of_max";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn write_text(path: &Path, body: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn report_csv(report: &ScenarioReport) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.copula.label(),
            r.median_i,
            report.median_ic,
            report.median_icm,
            opt(report.d_star),
            opt(r.crossings.d_c),
            opt(r.crossings.d_cm),
            r.n_c,
            r.n_cm,
            report.n_star,
            r.order.map_or("incomplete", |o| o.as_str()),
            r.regime.as_str(),
            r.e_i,
            report.e_ic,
            report.e_icm,
            report.spread.spread,
            report.spread.spread_pct_of_max,
        ));
    }
    out
}

/// Evenly spaced grid over the countermonotone support, which contains the
/// support of every other difference.
pub fn cdf_grid(report: &ScenarioReport) -> Vec<f64> {
    let (lo, hi) = (report.countermonotone.min(), report.countermonotone.max());
    let m = report.cdf_points;
    (0..m)
        .map(|k| {
            if k + 1 == m {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (m - 1) as f64
            }
        })
        .collect()
}

pub fn cdf_csv(report: &ScenarioReport, row: usize) -> String {
    let s = &report.rows[row].sample;
    let mut out = format!("{CDF_HEADER}\n");
    for x in cdf_grid(report) {
        out.push_str(&format!(
            "{x},{},{},{}\n",
            s.ecdf(x),
            report.comonotone.ecdf(x),
            report.countermonotone.ecdf(x)
        ));
    }
    out
}

/// Expected payoffs for one attachment point of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub epsilon: f64,
    pub e_ic: f64,
    pub e_icm: f64,
    pub spread_pct_of_max: f64,
    /// Per configured copula, in report order.
    pub e_i: Vec<f64>,
}

pub fn payoff_sweep(report: &ScenarioReport) -> Result<Vec<SweepRow>> {
    let w = report.sweep.width;
    report
        .sweep
        .deltas()
        .into_par_iter()
        .map(|delta| {
            let layer = LayerSpec::new(delta, delta + w, report.layer.principal())?;
            let s = uncertainty_spread(&report.countermonotone, &report.comonotone, &layer);
            Ok(SweepRow {
                delta,
                epsilon: layer.epsilon(),
                e_ic: s.e_c,
                e_icm: s.e_cm,
                spread_pct_of_max: s.spread_pct_of_max,
                e_i: report
                    .rows
                    .iter()
                    .map(|r| expected_layer_payoff(&r.sample, &layer))
                    .collect(),
            })
        })
        .collect()
}

pub fn payoff_sweep_csv(report: &ScenarioReport) -> Result<String> {
    let mut out = String::from("delta,epsilon,e_ic,e_icm,spread_pct_of_max");
    for r in &report.rows {
        out.push_str(&format!(",e_{}", r.copula.label()));
    }
    out.push('\n');
    for row in payoff_sweep(report)? {
        out.push_str(&format!(
            "{},{},{},{},{}",
            row.delta, row.epsilon, row.e_ic, row.e_icm, row.spread_pct_of_max
        ));
        for e in &row.e_i {
            out.push_str(&format!(",{e}"));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Layer anchored at the 95th percentile of the difference under
/// comonotonicity, independence and countermonotonicity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadBar {
    pub anchor: &'static str,
    pub delta: f64,
    pub epsilon: f64,
    pub e_ic: f64,
    pub e_icm: f64,
    pub spread: f64,
    pub spread_pct_of_max: f64,
}

pub fn spread_bars(report: &ScenarioReport) -> Result<Vec<SpreadBar>> {
    let anchors = [
        ("comonotone", &report.comonotone),
        ("independence", &report.independence),
        ("countermonotone", &report.countermonotone),
    ];
    anchors
        .into_iter()
        .map(|(anchor, sample)| {
            let delta = sample.quantile(0.95)?;
            let layer = LayerSpec::new(delta, delta + report.sweep.width, report.layer.principal())?;
            let s = uncertainty_spread(&report.countermonotone, &report.comonotone, &layer);
            Ok(SpreadBar {
                anchor,
                delta,
                epsilon: layer.epsilon(),
                e_ic: s.e_c,
                e_icm: s.e_cm,
                spread: s.spread,
                spread_pct_of_max: s.spread_pct_of_max,
            })
        })
        .collect()
}

pub fn spread_bars_csv(report: &ScenarioReport) -> Result<String> {
    let mut out = format!("{SPREAD_BARS_HEADER}\n");
    for b in spread_bars(report)? {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            b.anchor, b.delta, b.epsilon, b.e_ic, b.e_icm, b.spread, b.spread_pct_of_max
        ));
    }
    Ok(out)
}

/// Writes `report.csv` and one `cdf_<copula>.csv` per row.
pub fn emit_report(report: &ScenarioReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = vec![dir.join("report.csv")];
    write_text(&files[0], &report_csv(report))?;
    for (k, r) in report.rows.iter().enumerate() {
        let path = dir.join(format!("cdf_{}.csv", r.copula.label()));
        write_text(&path, &cdf_csv(report, k))?;
        files.push(path);
    }
    Ok(files)
}

/// Writes `payoff_sweep.csv` and `spread_bars.csv`.
pub fn emit_sweep(report: &ScenarioReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let sweep = dir.join("payoff_sweep.csv");
    write_text(&sweep, &payoff_sweep_csv(report)?)?;
    let bars = dir.join("spread_bars.csv");
    write_text(&bars, &spread_bars_csv(report)?)?;
    Ok(vec![sweep, bars])
}

/// Writes every report file into `dir` and returns their paths.
pub fn emit_outputs(report: &ScenarioReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut files = emit_report(report, dir)?;
    files.extend(emit_sweep(report, dir)?);
    Ok(files)
}

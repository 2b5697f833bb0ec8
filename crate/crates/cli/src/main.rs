//! `depbounds` command-line front end.
//!
//! Every subcommand reads a scenario config; the common flags override the
//! matching config keys. Exit codes: 0 success, 2 invalid input, 3 numerical
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use depbounds::scenario::{
    analyze, emit_report, emit_sweep, fit_models, load_populations, read_samples, run_scenario, simulate_marginals,
    write_params, write_samples, ScenarioConfig, ScenarioReport,
};
use depbounds::Result;

#[derive(Debug, Parser)]
#[command(
    name = "depbounds",
    version,
    about = "Dependence bounds for longevity divergence layers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit both marginal models and write params.json.
    Fit(Common),
    /// Simulate both marginal index samples and write samples.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Parameter file from `fit`; fits from the data when absent.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Analyse a sample file: report.csv and one cdf_<copula>.csv per copula.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Sample file from `simulate`; defaults to <out>/samples.csv.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Payoff sweep and spread bars for a sample file.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sample file from `simulate`; defaults to <out>/samples.csv.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Fit, simulate and analyse end to end, writing every output file.
    Run(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario config file.
    #[arg(long)]
    config: PathBuf,
    /// Master seed for every random stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of simulated index values per population.
    #[arg(long)]
    sims: Option<usize>,
    /// Probability band for merging CDF crossings.
    #[arg(long)]
    band: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::from_file(&self.config)?;
        if let Some(seed) = self.seed {
            cfg = cfg.with_seed(seed);
        }
        if let Some(sims) = self.sims {
            cfg = cfg.with_sims(sims);
        }
        if let Some(band) = self.band {
            cfg = cfg.with_band(band);
        }
        if let Some(out) = &self.out {
            cfg = cfg.with_out(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn samples_path(cfg: &ScenarioConfig, given: &Option<PathBuf>) -> PathBuf {
    given.clone().unwrap_or_else(|| cfg.out.join("samples.csv"))
}

fn announce(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn summarize(report: &ScenarioReport) {
    let d_star = report.d_star.map_or("-".to_string(), |d| format!("{d:.6}"));
    println!(
        "med(I^cm) {:.6}  med(I^c) {:.6}  d* {d_star}  E[r(I^c)] {:.6}  E[r(I^cm)] {:.6}",
        report.median_icm, report.median_ic, report.e_ic, report.e_icm
    );
    for r in &report.rows {
        let fmt = |d: Option<f64>| d.map_or("-".to_string(), |d| format!("{d:.6}"));
        println!(
            "{:<18} med(I) {:.6}  d^c {:>9}  d^cm {:>9}  order {:<10}  regime {:<14}  E[r(I)] {:.6}",
            r.copula.label(),
            r.median_i,
            fmt(r.crossings.d_c),
            fmt(r.crossings.d_cm),
            r.order.map_or("incomplete", |o| o.as_str()),
            r.regime.as_str(),
            r.e_i,
        );
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Fit(common) => {
            let cfg = common.load()?;
            let pops = load_populations(&cfg)?;
            let models = fit_models(&cfg, &pops)?;
            let path = cfg.out.join("params.json");
            write_params(&models, &path)?;
            announce(&[path]);
        }
        Command::Simulate { common, params } => {
            let mut cfg = common.load()?;
            if params.is_some() {
                cfg.params = params;
            }
            let pops = load_populations(&cfg)?;
            let models = fit_models(&cfg, &pops)?;
            let samples = simulate_marginals(&cfg, &models, &pops)?;
            let path = cfg.out.join("samples.csv");
            write_samples(&samples, &path)?;
            announce(&[path]);
        }
        Command::Analyze { common, samples } => {
            let cfg = common.load()?;
            let report = analyze(&cfg, &read_samples(samples_path(&cfg, &samples))?)?;
            summarize(&report);
            announce(&emit_report(&report, &cfg.out)?);
        }
        Command::Sweep { common, samples } => {
            let cfg = common.load()?;
            let report = analyze(&cfg, &read_samples(samples_path(&cfg, &samples))?)?;
            announce(&emit_sweep(&report, &cfg.out)?);
        }
        Command::Run(common) => {
            let cfg = common.load()?;
            let report = run_scenario(&cfg)?;
            summarize(&report);
            let mut files = Vec::new();
            if let Some(models) = &report.models {
                let path = cfg.out.join("params.json");
                write_params(models, &path)?;
                files.push(path);
            }
            files.extend(emit_report(&report, &cfg.out)?);
            files.extend(emit_sweep(&report, &cfg.out)?);
            announce(&files);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

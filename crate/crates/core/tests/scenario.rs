mod common;

use std::fs;

use common::{data_dir, kortis_config};
use depbounds::layer::LayerSpec;
use depbounds::scenario::{
    analyze, emit_outputs, fit_models, load_populations, payoff_sweep, run_scenario, simulate_marginals, spread_bars,
    ModelKind, ScenarioConfig, CDF_HEADER, REPORT_HEADER, SPREAD_BARS_HEADER,
};
use depbounds::{expected_layer_payoff, BoundRegime, Error};

#[test]
fn identical_populations_make_the_comonotone_difference_vanish() {
    let text = "population1.id = EW\npopulation1.data = ew_synthetic.csv\npopulation1.model = cbd\n\
                population1.alpha = 60\npopulation1.omega = 70\n\
                population2.id = EW\npopulation2.data = ew_synthetic.csv\npopulation2.model = cbd\n\
                population2.alpha = 60\npopulation2.omega = 70\n\
                copulas = comonotone, countermonotone\n\
                layer.delta = 0.001\nlayer.epsilon = 0.006\nsims = 5000\n";
    let cfg = ScenarioConfig::parse(text, &data_dir(), "identical").unwrap();
    let report = run_scenario(&cfg).unwrap();
    assert!(report.comonotone.values().iter().all(|&x| x == 0.0));
    assert_eq!(report.e_ic, 0.0);
    let co = &report.rows[0];
    assert!(co.sample.values().iter().all(|&x| x == 0.0));
    assert_eq!(co.e_i, 0.0);
    for delta in [1e-6, 0.001, 0.01] {
        let layer = LayerSpec::unit(delta, delta + 0.005).unwrap();
        assert_eq!(expected_layer_payoff(&report.comonotone, &layer), 0.0);
        assert_eq!(expected_layer_payoff(&co.sample, &layer), 0.0);
    }
    // Countermonotone pairing of one sample with itself is symmetric about 0.
    let cm = &report.rows[1].sample;
    assert_eq!(cm.values(), report.countermonotone.values());
    let v = cm.values();
    assert!((0..v.len()).all(|k| v[k] == -v[v.len() - 1 - k]));
}

#[test]
fn outputs_have_the_documented_headers() {
    let cfg = kortis_config(ModelKind::Cbd, 2000, "copulas = gaussian:0.5\ncdf.points = 11\n");
    let report = run_scenario(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_outputs(&report, dir.path()).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            "report.csv",
            "cdf_gaussian_0.5.csv",
            "payoff_sweep.csv",
            "spread_bars.csv"
        ]
    );
    let read = |name: &str| fs::read_to_string(dir.path().join(name)).unwrap();
    let first_line = |name: &str| read(name).lines().next().unwrap().to_string();
    assert_eq!(first_line("report.csv"), REPORT_HEADER);
    assert_eq!(first_line("cdf_gaussian_0.5.csv"), CDF_HEADER);
    assert_eq!(
        first_line("payoff_sweep.csv"),
        "delta,epsilon,e_ic,e_icm,spread_pct_of_max,e_gaussian_0.5"
    );
    assert_eq!(first_line("spread_bars.csv"), SPREAD_BARS_HEADER);
    assert_eq!(read("report.csv").lines().count(), 2);
    assert_eq!(read("cdf_gaussian_0.5.csv").lines().count(), 12);
    assert_eq!(read("payoff_sweep.csv").lines().count(), 602);
    assert_eq!(read("spread_bars.csv").lines().count(), 4);
    for name in &names {
        for line in read(name).lines().skip(1) {
            for cell in line.split(',').skip(1) {
                if let Ok(x) = cell.parse::<f64>() {
                    assert!(x.is_finite(), "{name}: {line}");
                }
            }
        }
    }
}

#[test]
fn cdf_export_spans_the_countermonotone_support() {
    let cfg = kortis_config(ModelKind::LeeCarter, 3000, "copulas = clayton:2\ncdf.points = 5\n");
    let report = run_scenario(&cfg).unwrap();
    let body = depbounds::scenario::cdf_csv(&report, 0);
    let rows: Vec<Vec<f64>> = body
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows[0][0], report.countermonotone.min());
    assert_eq!(rows[4][0], report.countermonotone.max());
    assert_eq!(&rows[4][1..], &[1.0, 1.0, 1.0]);
    for w in rows.windows(2) {
        assert!(w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
    }
}

#[test]
fn sweep_far_above_the_support_pays_nothing() {
    let cfg = kortis_config(ModelKind::Cbd, 5000, "");
    let report = run_scenario(&cfg).unwrap();
    let top = report.countermonotone.max();
    let rows = payoff_sweep(&report).unwrap();
    let above: Vec<_> = rows.iter().filter(|r| r.delta >= top).collect();
    assert!(!above.is_empty());
    for r in above {
        assert_eq!((r.e_ic, r.e_icm, r.spread_pct_of_max), (0.0, 0.0, 0.0));
        assert!(r.e_i.iter().all(|&e| e == 0.0));
    }
    let bottom = report.countermonotone.min();
    for r in rows.iter().filter(|r| r.epsilon <= bottom) {
        assert_eq!((r.e_ic, r.e_icm), (1.0, 1.0));
    }
}

#[test]
fn sweep_spread_changes_sign_next_to_the_reported_crossing() {
    for model in [ModelKind::Cbd, ModelKind::Normal, ModelKind::Lognormal] {
        let cfg = kortis_config(model, 20_000, "sweep.step = 0.0001\n");
        let report = run_scenario(&cfg).unwrap();
        let d_star = report.d_star.expect("unique crossing");
        let rows = payoff_sweep(&report).unwrap();
        let last_negative = rows
            .iter()
            .filter(|r| r.e_icm < r.e_ic)
            .map(|r| r.delta)
            .fold(f64::MIN, f64::max);
        let first_positive = rows
            .iter()
            .filter(|r| r.e_icm > r.e_ic && r.delta > last_negative)
            .map(|r| r.delta)
            .fold(f64::MAX, f64::min);
        // Spread is negative while the whole layer sits below d*, positive above.
        let slack = report.x_tolerance + cfg.sweep.step;
        assert!(
            last_negative >= d_star - cfg.sweep.width - slack && last_negative <= d_star + slack,
            "{model}: last negative {last_negative}, d* {d_star}"
        );
        assert!(
            first_positive <= d_star + slack,
            "{model}: first positive {first_positive}, d* {d_star}"
        );
    }
}

#[test]
fn spread_bars_anchor_on_upper_quantiles() {
    let cfg = kortis_config(ModelKind::Cbd, 5000, "");
    let report = run_scenario(&cfg).unwrap();
    let bars = spread_bars(&report).unwrap();
    let anchors: Vec<_> = bars.iter().map(|b| b.anchor).collect();
    assert_eq!(anchors, ["comonotone", "independence", "countermonotone"]);
    assert_eq!(bars[0].delta, report.comonotone.quantile(0.95).unwrap());
    assert_eq!(bars[2].delta, report.countermonotone.quantile(0.95).unwrap());
    assert!(bars[0].delta <= bars[1].delta && bars[1].delta <= bars[2].delta);
    for b in &bars {
        assert!((b.epsilon - b.delta - 0.005).abs() < 1e-15);
        assert!(b.e_icm >= b.e_ic, "{b:?}");
    }
}

#[test]
fn reports_are_self_consistent() {
    for model in ModelKind::ALL {
        let cfg = kortis_config(model, 20_000, "");
        let report = run_scenario(&cfg).unwrap();
        for r in &report.rows {
            assert!(r.median_i.is_finite() && r.e_i.is_finite());
            if r.regime == BoundRegime::Preserved {
                assert!(report.e_ic <= r.e_i && r.e_i <= report.e_icm, "{model} {}", r.copula);
            }
            if r.regime == BoundRegime::Reversed {
                assert!(report.e_icm <= r.e_i && r.e_i <= report.e_ic, "{model} {}", r.copula);
            }
            assert_eq!(r.order.is_some(), r.crossings.is_complete());
        }
    }
}

#[test]
fn every_copula_reuses_the_same_marginals() {
    let cfg = kortis_config(ModelKind::LeeCarter, 4000, "");
    let pops = load_populations(&cfg).unwrap();
    let models = fit_models(&cfg, &pops).unwrap();
    let samples = simulate_marginals(&cfg, &models, &pops).unwrap();
    let report = analyze(&cfg, &samples).unwrap();
    let a = samples.first.values();
    let b = samples.second.values();
    let mean_diff = (a.iter().sum::<f64>() - b.iter().sum::<f64>()) / a.len() as f64;
    for r in &report.rows {
        assert!((r.sample.mean() - mean_diff).abs() < 1e-12, "{}", r.copula);
    }
    assert!((report.comonotone.mean() - mean_diff).abs() < 1e-12);
}

#[test]
fn runs_are_deterministic_and_seed_sensitive() {
    let cfg = kortis_config(ModelKind::LiLee, 3000, "");
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(depbounds::scenario::report_csv(&a), depbounds::scenario::report_csv(&b));
    assert_eq!(a.marginal_checksum, b.marginal_checksum);
    let other = kortis_config(ModelKind::LiLee, 3000, "").with_seed(7);
    let c = run_scenario(&other).unwrap();
    assert_ne!(a.marginal_checksum, c.marginal_checksum);
}

#[test]
fn copula_rows_do_not_depend_on_list_position() {
    let one = run_scenario(&kortis_config(ModelKind::Cbd, 3000, "copulas = clayton:4\n")).unwrap();
    let two = run_scenario(&kortis_config(
        ModelKind::Cbd,
        3000,
        "copulas = gaussian:0, clayton:4\n",
    ))
    .unwrap();
    assert_eq!(one.rows[0].sample.values(), two.rows[1].sample.values());
}

#[test]
fn scenario_errors_carry_context() {
    let cfg = kortis_config(ModelKind::Cbd, 1000, "");
    let mut bad = cfg.clone();
    bad.populations[0].data = data_dir().join("missing.csv");
    assert!(matches!(run_scenario(&bad), Err(Error::Io { .. })));

    let mut bad = cfg.clone();
    bad.base_year = 2030;
    let err = run_scenario(&bad).unwrap_err();
    assert_eq!(err.exit_code(), 2);

    let mut bad = cfg;
    bad.params = Some(data_dir().join("kortis_lognormal.json"));
    bad.populations[1].id = "FR".into();
    let err = run_scenario(&bad).unwrap_err();
    assert!(err.to_string().contains("FR"), "{err}");
}

use super::*;
use crate::copula::{difference, extreme_transform, rank_reorder, sample_copula, CopulaSpec, ExtremeKind};
use crate::layer::expected_layer_payoff;
use crate::rng::Seed;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn dist(v: &[f64]) -> EmpiricalDist {
    EmpiricalDist::new(Sample::new(v.to_vec()).unwrap())
}

fn iv(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Interval {
    Interval::new(lo, hi, lo_closed, hi_closed)
}

/// Brute-force sign of F_a - F_b at x.
fn sign_at(a: &EmpiricalDist, b: &EmpiricalDist, x: f64) -> f64 {
    a.cdf(x) - b.cdf(x)
}

#[test]
fn identical_inputs_have_no_crossing() {
    let a = dist(&[1.0, 2.0, 2.0, 5.0]);
    let cs = detect_crossings(&a, &a.clone(), 0.0).unwrap();
    assert_eq!(cs.n_crossings(), 0);
    assert_eq!(cs.regions_le(), &[iv(1.0, 5.0, false, false)]);
    assert_eq!(cs.regions_ge(), &[iv(1.0, 5.0, false, false)]);
    let r = classify_regions(&cs, Direction::SecondSmaller).unwrap();
    assert_eq!(r.common_region(-10.0, 10.0), Some(RegionKind::Both));
}

#[test]
fn negative_band_rejected() {
    let a = dist(&[1.0]);
    assert!(detect_crossings(&a, &a, -1e-9).is_err());
    assert!(detect_crossings(&a, &a, f64::NAN).is_err());
}

#[test]
fn normal_scale_family_crosses_at_zero() {
    let n = 1001;
    let z = Normal::standard();
    let base: Vec<f64> = (1..=n).map(|k| z.inverse_cdf((k as f64 - 0.5) / n as f64)).collect();
    let a = dist(&base);
    let b = dist(&base.iter().map(|v| 2.0 * v).collect::<Vec<_>>());
    let cs = detect_crossings(&a, &b, 0.0).unwrap();
    assert_eq!(cs.n_crossings(), 1);
    let d = cs.points()[0];
    // Merged grid step around zero.
    let step = base[n / 2 + 1] - base[n / 2];
    assert!(d.abs() <= step, "{d} vs step {step}");
    assert_eq!(cs.first_sign(), -1);
}

#[test]
fn comonotone_vs_countermonotone_example() {
    let a = dist(&[-3.0, -3.0, -3.0]);
    let b = dist(&[-5.0, -3.0, -1.0]);
    let cs = detect_crossings(&a, &b, 0.0).unwrap();
    assert_eq!(cs.points(), &[-3.0]);
    let r = classify_regions(&cs, Direction::FirstSmaller).unwrap();
    assert_eq!(r.le, vec![iv(-5.0, -3.0, false, true)]);
    assert_eq!(r.ge, vec![iv(-3.0, -1.0, true, false)]);
    assert!(classify_regions(&cs, Direction::SecondSmaller).is_err());
}

#[test]
fn three_crossings_follow_the_region_indexing() {
    let a = dist(&[1.0, 2.0, 3.0, 4.0]);
    let b = dist(&[0.5, 2.5, 2.6, 4.5]);
    let cs = detect_crossings(&a, &b, 0.0).unwrap();
    assert_eq!(cs.points(), &[2.0, 2.6, 4.0]);
    let r = classify_regions(&cs, Direction::FirstSmaller).unwrap();
    assert_eq!(r.le, vec![iv(0.5, 2.0, false, true), iv(2.6, 4.0, true, true)]);
    assert_eq!(r.ge, vec![iv(4.0, 4.5, true, false), iv(2.0, 2.6, true, true)]);
}

#[test]
fn five_crossings_match_pointwise_comparison() {
    let a = dist(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    let b = dist(&[0.5, 2.5, 2.6, 4.5, 4.6, 6.5]);
    let cs = detect_crossings(&a, &b, 0.0).unwrap();
    assert_eq!(cs.points(), &[2.0, 2.6, 4.0, 4.6, 6.0]);
    let r = classify_regions(&cs, Direction::FirstSmaller).unwrap();
    assert_eq!(r.le.len(), 3);
    assert_eq!(r.ge.len(), 3);
    // Exhaustive comparison on a fine grid; crossing points themselves sit on
    // jumps, where equality only holds in the limit, so they are skipped.
    let mut x = -1.0;
    while x < 8.0 {
        if !cs.points().iter().any(|d| (d - x).abs() < 1e-9) {
            let diff = sign_at(&a, &b, x);
            let in_le = r.le.iter().any(|i| i.contains(x));
            let in_ge = r.ge.iter().any(|i| i.contains(x));
            if in_le {
                assert!(diff <= 0.0, "x {x}: {diff}");
            }
            if in_ge {
                assert!(diff >= 0.0, "x {x}: {diff}");
            }
            if x > a.lower().min(b.lower()) && x < a.upper().max(b.upper()) {
                assert!(in_le ^ in_ge, "x {x} must be in exactly one region");
            }
        }
        x += 0.01;
    }
}

#[test]
fn band_merges_noise_crossings() {
    let a = dist(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    let b = dist(&[0.5, 2.5, 2.6, 4.5, 4.6, 6.5]);
    // Every difference has magnitude 1/6, so a band of 1/6 leaves none strict.
    let cs = detect_crossings(&a, &b, 1.0 / 6.0).unwrap();
    assert_eq!(cs.n_crossings(), 0);
    assert_eq!(cs.first_sign(), 0);
}

#[test]
fn split_estimator_places_crossing_inside_the_neutral_run() {
    // nums: strict -, then neutral run with wrong-sign mass on the left part.
    let nums = [-10, 1, -1, 0, 2, 3, 10];
    // Candidates 1..=6; rightmost minimal cost wins.
    assert_eq!(split_point(&nums, 0, 6, 1), 4);
    let zeros = [-5, 0, 0, 0, 5];
    assert_eq!(split_point(&zeros, 0, 4, 1), 4);
}

#[test]
fn outer_regions_extend_beyond_the_support() {
    let a = dist(&[-3.0, -3.0, -3.0]);
    let b = dist(&[-5.0, -3.0, -1.0]);
    let r = classify_regions(&detect_crossings(&a, &b, 0.0).unwrap(), Direction::FirstSmaller).unwrap();
    assert_eq!(r.common_region(-9.0, -4.0), Some(RegionKind::Le));
    assert_eq!(r.common_region(-2.0, 7.0), Some(RegionKind::Ge));
    assert_eq!(r.common_region(-4.0, -2.0), None);
}

fn crossing_at(d: f64) -> CrossingSet {
    // Convex-smaller first: point mass at d against a three-point spread.
    detect_crossings(&dist(&[d, d, d]), &dist(&[d - 2.0, d, d + 2.0]), 0.0).unwrap()
}

#[test]
fn regime_table() {
    let layer = |a: f64, b: f64| LayerSpec::unit(a, b).unwrap();
    let (cs_c, cs_cm) = (crossing_at(5.0), crossing_at(2.0));
    // delta < d_cm < eps < d_c: only the comonotone side certifies.
    assert_eq!(bound_regime(&cs_c, &cs_cm, &layer(1.0, 3.0)), BoundRegime::OnlyCUpper);
    // Both above every crossing.
    assert_eq!(bound_regime(&cs_c, &cs_cm, &layer(6.0, 7.0)), BoundRegime::Preserved);
    // Both below every crossing.
    assert_eq!(bound_regime(&cs_c, &cs_cm, &layer(0.0, 1.0)), BoundRegime::Reversed);
    // Between the crossings: above d_cm, below d_c.
    assert_eq!(bound_regime(&cs_c, &cs_cm, &layer(3.0, 4.0)), BoundRegime::BothUpper);
    // d_c < delta < eps < d_cm.
    let (cs_c, cs_cm) = (crossing_at(2.0), crossing_at(5.0));
    assert_eq!(bound_regime(&cs_c, &cs_cm, &layer(3.0, 4.0)), BoundRegime::BothLower);
    assert_eq!(bound_regime(&cs_c, &cs_cm, &layer(1.0, 3.0)), BoundRegime::OnlyCmLower);
    assert_eq!(bound_regime(&cs_c, &cs_cm, &layer(4.0, 6.0)), BoundRegime::OnlyCLower);
    let (cs_c, cs_cm) = (crossing_at(5.0), crossing_at(2.0));
    assert_eq!(bound_regime(&cs_c, &cs_cm, &layer(4.0, 6.0)), BoundRegime::OnlyCmUpper);
    let same = crossing_at(3.0);
    assert_eq!(bound_regime(&same, &same, &layer(2.0, 4.0)), BoundRegime::Ambiguous);
}

#[test]
fn regime_with_degenerate_families() {
    let layer = LayerSpec::unit(6.0, 7.0).unwrap();
    let equal = detect_crossings(&dist(&[1.0, 2.0]), &dist(&[1.0, 2.0]), 0.0).unwrap();
    let cm = crossing_at(2.0);
    assert_eq!(bound_regime(&equal, &cm, &layer), BoundRegime::Preserved);
    assert_eq!(bound_regime(&equal, &equal, &layer), BoundRegime::Preserved);
    let low = LayerSpec::unit(0.0, 1.0).unwrap();
    assert_eq!(bound_regime(&equal, &cm, &low), BoundRegime::Reversed);
    // A family whose first region contradicts the convex order certifies nothing.
    let wrong = detect_crossings(&dist(&[0.0, 2.0, 4.0]), &dist(&[2.0, 2.0, 2.0]), 0.0).unwrap();
    assert_eq!(bound_regime(&wrong, &wrong, &layer), BoundRegime::Ambiguous);
}

#[test]
fn crossing_order_examples() {
    let t = |c, s, m| CrossingTriple {
        d_c: Some(c),
        d_star: Some(s),
        d_cm: Some(m),
    };
    let close = t(0.001728, 0.001729, 0.001843);
    let at_coarse = crossing_order(&close, 1e-5).unwrap();
    assert!(matches!(at_coarse, CrossingOrder::Coincide | CrossingOrder::CStarCm));
    assert_eq!(crossing_order(&close, 1e-7).unwrap(), CrossingOrder::CStarCm);
    assert_eq!(
        crossing_order(&t(0.004174, 0.001729, -0.000367), 1e-5).unwrap(),
        CrossingOrder::CmStarC
    );
    assert_eq!(crossing_order(&t(0.5, 0.5, 0.5), 0.0).unwrap(), CrossingOrder::Coincide);
    assert_eq!(
        crossing_order(&t(0.0, 1.0, 0.5), 0.01).unwrap(),
        CrossingOrder::Violation
    );
    let missing = CrossingTriple {
        d_c: Some(0.0),
        ..Default::default()
    };
    assert!(crossing_order(&missing, 0.0).is_err());
}

fn normal_sample(n: usize, seed: u64) -> Sample {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let v = crate::rng::par_generate(n, Seed(seed), |r| r.sample::<f64, _>(StandardNormal));
    Sample::new(v).unwrap()
}

#[test]
fn dispersive_shortcut_matches_detected_crossing() {
    let s1 = normal_sample(10_000, 41);
    let s2 = Sample::from_sorted(s1.values().iter().map(|v| 2.0 * v).collect()).unwrap();
    let d = dispersive_shortcut(&s1, &s2).unwrap();
    assert_eq!(d, s1.median() - s2.median());
    let ic = difference(&extreme_transform(&s1, &s2, ExtremeKind::Comonotone).unwrap());
    let icm = difference(&extreme_transform(&s1, &s2, ExtremeKind::Countermonotone).unwrap());
    let cs = detect_crossings(&ic.clone().into(), &icm.clone().into(), 0.0).unwrap();
    let detected = cs.unique().expect("unique crossing under dispersive order");
    let mut grid: Vec<f64> = ic.values().iter().chain(icm.values()).copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let pos = |x: f64| grid.partition_point(|&g| g < x) as i64;
    assert!((pos(detected) - pos(d)).abs() <= 1, "{detected} vs {d}");
    let n = s1.len() as f64;
    for s in [&ic, &icm] {
        assert!((s.ecdf(d) - 0.5).abs() <= 1.0 / n + 1e-15);
    }
}

#[test]
fn dispersive_shortcut_edge_cases() {
    let s1 = normal_sample(2_000, 42);
    assert_eq!(dispersive_shortcut(&s1, &s1), Some(0.0));
    let ic = difference(&extreme_transform(&s1, &s1, ExtremeKind::Comonotone).unwrap());
    assert!(ic.values().iter().all(|&v| v == 0.0));
    // Independent draws of two normals: the quantile difference wiggles.
    let s2 = normal_sample(2_000, 43);
    let grid = ProbabilityGrid::default();
    let g: Vec<f64> = grid
        .points()
        .iter()
        .map(|&p| s1.quantile(p).unwrap() - s2.quantile(p).unwrap())
        .collect();
    assert!(g.windows(2).any(|w| w[1] > w[0]) && g.windows(2).any(|w| w[1] < w[0]));
    assert_eq!(dispersive_shortcut(&s1, &s2), None);
    assert_eq!(dispersive_shortcut(&s1, &normal_sample(10, 1)), None);
}

#[test]
fn symmetric_spec_validation_and_crossing() {
    let base = normal_sample(10_000, 44);
    let spec = SymmetricLocationScaleSpec::new(0.1, 0.03, 1.0, 2.0, base.clone()).unwrap();
    assert!((symmetric_common_crossing(&spec) - 0.07).abs() < 1e-15);
    let spec = SymmetricLocationScaleSpec::new(0.2, 0.2, 1.0, 2.0, base.clone()).unwrap();
    assert_eq!(symmetric_common_crossing(&spec), 0.0);
    assert!(SymmetricLocationScaleSpec::new(0.0, 0.0, 0.0, 1.0, base.clone()).is_err());
    let skewed = Sample::new(base.values().iter().map(|v| v.exp()).collect()).unwrap();
    assert!(SymmetricLocationScaleSpec::new(0.0, 0.0, 1.0, 1.0, skewed).is_err());
}

#[test]
fn symmetric_marginals_give_a_common_crossing() {
    let n = 100_000;
    let base = normal_sample(n, 45);
    let spec = SymmetricLocationScaleSpec::new(0.03, 0.014, 0.012, 0.006, base).unwrap();
    let (s1, s2) = spec.marginals();
    let u = sample_copula(&CopulaSpec::Gaussian { rho: 0.5 }, n, Seed(46)).unwrap();
    let i = difference(&rank_reorder(&s1, &s2, &u).unwrap());
    let ic = difference(&extreme_transform(&s1, &s2, ExtremeKind::Comonotone).unwrap());
    let icm = difference(&extreme_transform(&s1, &s2, ExtremeKind::Countermonotone).unwrap());
    let band = default_band(n);
    let target = symmetric_common_crossing(&spec);
    for (a, b) in [(&ic, &i), (&i, &icm), (&ic, &icm)] {
        let cs = detect_crossings(&a.clone().into(), &b.clone().into(), band).unwrap();
        let d = cs.unique().expect("unique crossing");
        assert!((d - target).abs() < 5e-4, "{d} vs {target}");
    }
}

fn dyadic_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-512i32..512).prop_map(|k| k as f64 / 64.0), len)
}

fn scenario() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, u64, usize)> {
    (5usize..150).prop_flat_map(|n| (dyadic_vec(n), dyadic_vec(n), any::<u64>(), 0usize..4))
}

fn reorder(a: &[f64], b: &[f64], seed: u64, which: usize) -> (Sample, Sample, Sample) {
    let (s1, s2) = (Sample::new(a.to_vec()).unwrap(), Sample::new(b.to_vec()).unwrap());
    let spec = [
        CopulaSpec::Gaussian { rho: 0.4 },
        CopulaSpec::Clayton { theta: 3.0 },
        CopulaSpec::Independence,
        CopulaSpec::Gaussian { rho: -0.7 },
    ][which];
    let u = sample_copula(&spec, s1.len(), Seed(seed)).unwrap();
    let i = difference(&rank_reorder(&s1, &s2, &u).unwrap());
    let ic = difference(&extreme_transform(&s1, &s2, ExtremeKind::Comonotone).unwrap());
    let icm = difference(&extreme_transform(&s1, &s2, ExtremeKind::Countermonotone).unwrap());
    (ic, i, icm)
}

/// Candidate layer endpoints inside a region: its finite ends, sample points
/// inside it, and points beyond the support for the outer regions.
fn points_in(r: &Interval, lower: f64, upper: f64, values: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = values.iter().copied().filter(|&v| r.contains(v)).collect();
    if r.lo_closed {
        pts.push(r.lo);
    }
    if r.hi_closed {
        pts.push(r.hi);
    }
    if r.lo == lower && !r.lo_closed {
        pts.push(lower - 1.0);
    }
    if r.hi == upper && !r.hi_closed {
        pts.push(upper + 1.0);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn signs_alternate_across_crossings((a, b, seed, which) in scenario(), band_steps in 0usize..3) {
        let (ic, i, icm) = reorder(&a, &b, seed, which);
        let band = band_steps as f64 / ic.len() as f64;
        for (x, y) in [(&ic, &i), (&i, &icm), (&ic, &icm)] {
            let (dx, dy) = (EmpiricalDist::new(x.clone()), EmpiricalDist::new(y.clone()));
            let cs = detect_crossings(&dx, &dy, band).unwrap();
            for &g in x.values().iter().chain(y.values()) {
                let diff = sign_at(&dx, &dy, g);
                if diff.abs() > band + 1e-12 {
                    let passed = cs.points().iter().filter(|&&d| d <= g).count();
                    let expected = cs.first_sign() as f64 * if passed % 2 == 0 { 1.0 } else { -1.0 };
                    prop_assert_eq!(diff.signum(), expected);
                }
            }
            prop_assert!(cs.points().windows(2).all(|w| w[0] < w[1]));
            prop_assert!(cs.points().iter().all(|&d| d > cs.lower() && d < cs.upper()));
        }
    }

    #[test]
    fn convex_order_gives_odd_counts_and_tiled_regions((a, b, seed, which) in scenario()) {
        let (ic, i, icm) = reorder(&a, &b, seed, which);
        for (x, y) in [(&ic, &i), (&i, &icm), (&ic, &icm)] {
            let cs = detect_crossings(&x.clone().into(), &y.clone().into(), 0.0).unwrap();
            let r = classify_regions(&cs, Direction::FirstSmaller).unwrap();
            if x == y {
                prop_assert_eq!(cs.n_crossings(), 0);
                continue;
            }
            prop_assert_eq!(cs.n_crossings() % 2, 1);
            prop_assert_eq!(r.le.len(), cs.n_crossings().div_ceil(2));
            prop_assert_eq!(r.ge.len(), cs.n_crossings().div_ceil(2));
            let mut all: Vec<Interval> = r.le.iter().chain(&r.ge).copied().collect();
            all.sort_by(|p, q| p.lo.total_cmp(&q.lo));
            prop_assert_eq!(all[0].lo, cs.lower());
            prop_assert_eq!(all[all.len() - 1].hi, cs.upper());
            prop_assert!(all.windows(2).all(|w| w[0].hi == w[1].lo));
        }
    }

    #[test]
    fn region_inequalities_hold_exactly((a, b, seed, which) in scenario()) {
        let (ic, i, icm) = reorder(&a, &b, seed, which);
        for (x, y) in [(&ic, &i), (&i, &icm), (&ic, &icm)] {
            let cs = detect_crossings(&x.clone().into(), &y.clone().into(), 0.0).unwrap();
            let r = classify_regions(&cs, Direction::FirstSmaller).unwrap();
            let values: Vec<f64> = x.values().iter().chain(y.values()).copied().collect();
            for (list, y_below) in [(&r.le, true), (&r.ge, false)] {
                for region in list.iter() {
                    let pts = points_in(region, cs.lower(), cs.upper(), &values);
                    for (k, &lo) in pts.iter().enumerate() {
                        for &hi in pts.iter().skip(k + 1).step_by(3) {
                            let layer = LayerSpec::unit(lo, hi).unwrap();
                            let (ex, ey) = (expected_layer_payoff(x, &layer), expected_layer_payoff(y, &layer));
                            if y_below {
                                prop_assert!(ey <= ex, "D<= {}: {} > {}", region, ey, ex);
                            } else {
                                prop_assert!(ex <= ey, "D>= {}: {} > {}", region, ex, ey);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn preserved_regime_orders_payoffs((a, b, seed, which) in scenario(), lo in -10.0f64..10.0, w in 0.01f64..4.0) {
        let (ic, i, icm) = reorder(&a, &b, seed, which);
        let cs_c = detect_crossings(&ic.clone().into(), &i.clone().into(), 0.0).unwrap();
        let cs_cm = detect_crossings(&i.clone().into(), &icm.clone().into(), 0.0).unwrap();
        let lo = (lo * 64.0).round() / 64.0;
        let layer = LayerSpec::unit(lo, lo + (w * 64.0).ceil() / 64.0).unwrap();
        let (ec, ei, ecm) = (
            expected_layer_payoff(&ic, &layer),
            expected_layer_payoff(&i, &layer),
            expected_layer_payoff(&icm, &layer),
        );
        match bound_regime(&cs_c, &cs_cm, &layer) {
            BoundRegime::Preserved => prop_assert!(ec <= ei && ei <= ecm),
            BoundRegime::Reversed => prop_assert!(ecm <= ei && ei <= ec),
            BoundRegime::BothUpper => prop_assert!(ei <= ec && ei <= ecm),
            BoundRegime::BothLower => prop_assert!(ec <= ei && ecm <= ei),
            BoundRegime::OnlyCUpper => prop_assert!(ei <= ec),
            BoundRegime::OnlyCLower => prop_assert!(ec <= ei),
            BoundRegime::OnlyCmUpper => prop_assert!(ei <= ecm),
            BoundRegime::OnlyCmLower => prop_assert!(ecm <= ei),
            BoundRegime::Ambiguous => {}
        }
    }
}

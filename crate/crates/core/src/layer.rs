//! Layer payoffs `B/(eps-delta) * ((x-delta)+ - (x-eps)+)`, stop-loss
//! transforms and the dependence-uncertainty spread.

use serde::{Deserialize, Serialize};

use crate::dist::{neumaier_sum, Sample};
use crate::error::{Error, Result};

/// Attachment `delta`, exhaustion `epsilon`, principal `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    delta: f64,
    epsilon: f64,
    principal: f64,
}

impl LayerSpec {
    pub fn new(delta: f64, epsilon: f64, principal: f64) -> Result<Self> {
        if !(delta.is_finite() && epsilon.is_finite() && principal.is_finite()) {
            return Err(Error::invalid("layer parameters must be finite"));
        }
        if delta >= epsilon {
            return Err(Error::invalid(format!(
                "layer attachment {delta} must be below exhaustion {epsilon}"
            )));
        }
        if principal <= 0.0 {
            return Err(Error::invalid(format!("layer principal {principal} must be positive")));
        }
        Ok(LayerSpec {
            delta,
            epsilon,
            principal,
        })
    }

    /// Layer whose principal equals its width.
    pub fn unit(delta: f64, epsilon: f64) -> Result<Self> {
        LayerSpec::new(delta, epsilon, epsilon - delta)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn principal(&self) -> f64 {
        self.principal
    }

    pub fn width(&self) -> f64 {
        self.epsilon - self.delta
    }
}

pub fn layer_payoff(x: f64, layer: &LayerSpec) -> f64 {
    let covered = x.clamp(layer.delta, layer.epsilon) - layer.delta;
    if covered == layer.width() {
        layer.principal
    } else {
        layer.principal * covered / layer.width()
    }
}

/// Mean of `(value - retention)+`.
pub fn stop_loss(dist: &Sample, retention: f64) -> f64 {
    let v = dist.values();
    let start = dist.count_le(retention);
    neumaier_sum(v[start..].iter().map(|&x| x - retention)) / v.len() as f64
}

/// Mean layer payoff over the sample.
///
/// Computed as `B/(eps-delta)` times the mean of `clamp(x, delta, eps) - delta`,
/// which is monotone in every sample value, so reorderings that dominate in
/// stop-loss order compare exactly when the arithmetic is exact.
pub fn expected_layer_payoff(dist: &Sample, layer: &LayerSpec) -> f64 {
    let v = dist.values();
    let lo = dist.count_le(layer.delta);
    let hi = v.partition_point(|&x| x < layer.epsilon);
    let width = layer.width();
    let full = (v.len() - hi) as f64 * width;
    let partial = neumaier_sum(v[lo..hi].iter().map(|&x| x - layer.delta));
    let mean_covered = neumaier_sum([full, partial]) / v.len() as f64;
    let e = layer.principal * (mean_covered / width);
    e.clamp(0.0, layer.principal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadSign {
    /// Countermonotone payoff above comonotone payoff.
    Positive,
    Zero,
    /// Comonotone payoff above countermonotone payoff.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadReport {
    pub e_cm: f64,
    pub e_c: f64,
    pub spread: f64,
    pub spread_pct_of_max: f64,
    pub sign: SpreadSign,
}

pub fn uncertainty_spread(sample_cm: &Sample, sample_c: &Sample, layer: &LayerSpec) -> SpreadReport {
    let e_cm = expected_layer_payoff(sample_cm, layer);
    let e_c = expected_layer_payoff(sample_c, layer);
    let spread = e_cm - e_c;
    let sign = if spread > 0.0 {
        SpreadSign::Positive
    } else if spread < 0.0 {
        SpreadSign::Negative
    } else {
        SpreadSign::Zero
    };
    SpreadReport {
        e_cm,
        e_c,
        spread,
        spread_pct_of_max: 100.0 * spread / layer.principal,
        sign,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};

    fn kortis() -> LayerSpec {
        LayerSpec::unit(0.034, 0.039).unwrap()
    }

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn layer_validation() {
        assert!(LayerSpec::new(0.04, 0.03, 1.0).is_err());
        assert!(LayerSpec::new(0.03, 0.03, 1.0).is_err());
        assert!(LayerSpec::new(0.03, 0.04, 0.0).is_err());
        assert!(LayerSpec::new(f64::NAN, 0.04, 1.0).is_err());
        assert!((kortis().principal() - 0.005).abs() < 1e-15);
    }

    #[test]
    fn payoff_examples() {
        let l = kortis();
        assert_eq!(layer_payoff(0.030, &l), 0.0);
        assert_eq!(layer_payoff(0.050, &l), l.principal());
        assert!((layer_payoff(0.036, &l) - 0.002).abs() < 1e-15);
    }

    #[test]
    fn stop_loss_examples() {
        assert!((stop_loss(&s(&[1.0, 2.0, 3.0]), 2.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(stop_loss(&s(&[1.0, 2.0, 3.0]), 3.0), 0.0);
        assert_eq!(stop_loss(&s(&[1.0, 2.0, 3.0]), 10.0), 0.0);
    }

    #[test]
    fn stop_loss_of_normal_draws_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let draws: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let sample = Sample::new(draws).unwrap();
        let z = Normal::standard();
        for x in [0.0, 0.5, -1.0] {
            let oracle = z.pdf(x) - x * (1.0 - z.cdf(x));
            assert!((stop_loss(&sample, x) - oracle).abs() < 0.005, "x {x}");
        }
    }

    #[test]
    fn expected_payoff_examples() {
        let l = kortis();
        let e = expected_layer_payoff(&s(&[0.030, 0.036, 0.050]), &l);
        assert!((e - 0.007 / 3.0).abs() < 1e-15);
        assert_eq!(expected_layer_payoff(&s(&[0.01, 0.02]), &l), 0.0);
        assert_eq!(expected_layer_payoff(&s(&[0.05, 0.06]), &l), l.principal());
    }

    #[test]
    fn spread_examples() {
        let cm = s(&[-5.0, -3.0, -1.0]);
        let c = s(&[-3.0, -3.0, -3.0]);
        let r = uncertainty_spread(&cm, &c, &LayerSpec::new(-4.0, -2.0, 2.0).unwrap());
        assert_eq!((r.e_cm, r.e_c, r.spread), (1.0, 1.0, 0.0));
        assert_eq!(r.sign, SpreadSign::Zero);

        let r = uncertainty_spread(&cm, &cm, &kortis());
        assert_eq!(r.spread, 0.0);
        let r = uncertainty_spread(&cm, &c, &LayerSpec::unit(10.0, 11.0).unwrap());
        assert_eq!((r.e_cm, r.e_c, r.spread), (0.0, 0.0, 0.0));

        let r = uncertainty_spread(&cm, &c, &LayerSpec::unit(-2.0, -1.5).unwrap());
        assert_eq!(r.sign, SpreadSign::Positive);
        assert!((r.spread_pct_of_max - 100.0 * r.spread / 0.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn identity_with_stop_loss(
            v in prop::collection::vec(-1.0f64..1.0, 1..300),
            a in -1.2f64..1.2,
            w in 1e-4f64..1.0,
            b in 1e-3f64..10.0,
        ) {
            let sample = Sample::new(v).unwrap();
            let l = LayerSpec::new(a, a + w, b).unwrap();
            let e = expected_layer_payoff(&sample, &l);
            let via_sl = b / l.width() * (stop_loss(&sample, l.delta()) - stop_loss(&sample, l.epsilon()));
            prop_assert!((e - via_sl).abs() <= 1e-12 * b.max(e.abs()), "{} vs {}", e, via_sl);
            prop_assert!((0.0..=b).contains(&e));
            let direct = sample.values().iter().map(|&x| layer_payoff(x, &l)).sum::<f64>() / sample.len() as f64;
            prop_assert!((e - direct).abs() <= 1e-12 * b);
        }

        #[test]
        fn payoff_is_monotone_and_bounded(x in -2.0f64..2.0, y in -2.0f64..2.0, a in -1.0f64..1.0, w in 1e-3f64..1.0) {
            let l = LayerSpec::unit(a, a + w).unwrap();
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(layer_payoff(lo, &l) <= layer_payoff(hi, &l));
            prop_assert!((0.0..=l.principal()).contains(&layer_payoff(x, &l)));
        }

        #[test]
        fn stop_loss_convex_non_increasing(
            v in prop::collection::vec(-1.0f64..1.0, 1..200),
            x in -1.5f64..1.5,
            h in 1e-3f64..0.5,
        ) {
            let s = Sample::new(v).unwrap();
            let (a, b, c) = (stop_loss(&s, x - h), stop_loss(&s, x), stop_loss(&s, x + h));
            prop_assert!(c <= b + 1e-12 && b <= a + 1e-12);
            prop_assert!(b <= 0.5 * (a + c) + 1e-12);
        }

        #[test]
        fn shifting_the_layer_up_never_raises_payoff(
            v in prop::collection::vec(-1.0f64..1.0, 1..200),
            a in -1.2f64..1.2,
            w in 1e-3f64..0.5,
            shift in 0.0f64..0.5,
        ) {
            let s = Sample::new(v).unwrap();
            let l0 = LayerSpec::unit(a, a + w).unwrap();
            let l1 = LayerSpec::new(a + shift, a + shift + w, l0.principal()).unwrap();
            prop_assert!(expected_layer_payoff(&s, &l1) <= expected_layer_payoff(&s, &l0) + 1e-12 * w);
        }
    }
}

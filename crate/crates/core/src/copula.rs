//! Copula sampling and rank reordering of marginal samples.

use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::dist::Sample;
use crate::error::{Error, Result};
use crate::rng::{par_generate, Seed};

/// Dependence model for a pair of uniforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CopulaSpec {
    Gaussian { rho: f64 },
    Clayton { theta: f64 },
    Independence,
    Comonotone,
    Countermonotone,
}

impl CopulaSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CopulaSpec::Gaussian { rho } if !(-1.0..=1.0).contains(&rho) => {
                Err(Error::invalid(format!("gaussian correlation {rho} outside [-1, 1]")))
            }
            CopulaSpec::Clayton { theta } if !(theta > 0.0 && theta.is_finite()) => {
                Err(Error::invalid(format!("clayton parameter {theta} must be positive")))
            }
            _ => Ok(()),
        }
    }

    /// Short name used in report rows, CSV headers and file names.
    pub fn label(&self) -> String {
        match *self {
            CopulaSpec::Gaussian { rho } => format!("gaussian_{rho}"),
            CopulaSpec::Clayton { theta } => format!("clayton_{theta}"),
            CopulaSpec::Independence => "independence".into(),
            CopulaSpec::Comonotone => "comonotone".into(),
            CopulaSpec::Countermonotone => "countermonotone".into(),
        }
    }
}

impl fmt::Display for CopulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for CopulaSpec {
    type Err = Error;

    /// Accepts `gaussian:0.5`, `gaussian_0.5`, `clayton:2`, `independence`,
    /// `comonotone` and `countermonotone`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, param) = match s.find([':', '_']) {
            Some(i) => (&s[..i], Some(s[i + 1..].trim())),
            None => (s, None),
        };
        let parse_param = || -> Result<f64> {
            let p = param.ok_or_else(|| Error::invalid(format!("copula '{s}' needs a parameter")))?;
            p.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad copula parameter in '{s}'")))
        };
        let spec = match (name.to_ascii_lowercase().as_str(), param) {
            ("gaussian", _) => CopulaSpec::Gaussian { rho: parse_param()? },
            ("clayton", _) => CopulaSpec::Clayton { theta: parse_param()? },
            ("independence", None) => CopulaSpec::Independence,
            ("comonotone", None) => CopulaSpec::Comonotone,
            ("countermonotone", None) => CopulaSpec::Countermonotone,
            _ => return Err(Error::invalid(format!("unknown copula '{s}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Aligned pairs of rank carriers; only their ranks matter to [`rank_reorder`].
#[derive(Debug, Clone, PartialEq)]
pub struct UniformPairs {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl UniformPairs {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::LengthMismatch {
                left: u.len(),
                right: v.len(),
            });
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite rank carrier"));
        }
        Ok(UniformPairs { u, v })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

fn open_unit(x: f64) -> f64 {
    x.clamp(f64::MIN_POSITIVE, BELOW_ONE)
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Draws `n` pairs in (0,1)^2 from `spec`.
pub fn sample_copula(spec: &CopulaSpec, n: usize, seed: Seed) -> Result<UniformPairs> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::invalid("copula sample size must be at least 1"));
    }
    let spec = *spec;
    let pairs = par_generate(n, seed, move |rng| match spec {
        CopulaSpec::Gaussian { rho } => {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let z2 = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
            (open_unit(std_normal_cdf(z1)), open_unit(std_normal_cdf(z2)))
        }
        CopulaSpec::Clayton { theta } => {
            let u: f64 = rng.sample(Open01);
            let w: f64 = rng.sample(Open01);
            let v = (u.powf(-theta) * (w.powf(-theta / (1.0 + theta)) - 1.0) + 1.0).powf(-1.0 / theta);
            (u, open_unit(v))
        }
        CopulaSpec::Independence => (rng.sample(Open01), rng.sample(Open01)),
        CopulaSpec::Comonotone => {
            let u: f64 = rng.sample(Open01);
            (u, u)
        }
        CopulaSpec::Countermonotone => {
            let u: f64 = rng.sample(Open01);
            (u, open_unit(1.0 - u))
        }
    });
    let (u, v) = pairs.into_iter().unzip();
    Ok(UniformPairs { u, v })
}

/// Two aligned vectors of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    first: Vec<f64>,
    second: Vec<f64>,
}

impl PairedSample {
    pub fn new(first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::LengthMismatch {
                left: first.len(),
                right: second.len(),
            });
        }
        if first.iter().chain(&second).any(|x| !x.is_finite()) {
            return Err(Error::invalid("paired sample holds a non-finite value"));
        }
        Ok(PairedSample { first, second })
    }

    pub fn first(&self) -> &[f64] {
        &self.first
    }

    pub fn second(&self) -> &[f64] {
        &self.second
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.first.iter().copied().zip(self.second.iter().copied())
    }
}

/// 0-based ranks, ties broken by position.
fn ranks(x: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut rank = vec![0; x.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Pair `i` takes the value of `s1` at the rank of `u_i` and the value of
/// `s2` at the rank of `v_i`.
pub fn rank_reorder(s1: &Sample, s2: &Sample, uniforms: &UniformPairs) -> Result<PairedSample> {
    let n = uniforms.len();
    for len in [s1.len(), s2.len()] {
        if len != n {
            return Err(Error::LengthMismatch { left: len, right: n });
        }
    }
    let (ru, rv) = rayon::join(|| ranks(&uniforms.u), || ranks(&uniforms.v));
    let first = ru.iter().map(|&r| s1.values()[r]).collect();
    let second = rv.iter().map(|&r| s2.values()[r]).collect();
    Ok(PairedSample { first, second })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremeKind {
    Comonotone,
    Countermonotone,
}

/// Comonotone pairs the k-th smallest values of both samples;
/// countermonotone pairs the k-th smallest of `s1` with the k-th largest of `s2`.
pub fn extreme_transform(s1: &Sample, s2: &Sample, kind: ExtremeKind) -> Result<PairedSample> {
    if s1.len() != s2.len() {
        return Err(Error::LengthMismatch {
            left: s1.len(),
            right: s2.len(),
        });
    }
    let first = s1.values().to_vec();
    let second = match kind {
        ExtremeKind::Comonotone => s2.values().to_vec(),
        ExtremeKind::Countermonotone => s2.values().iter().rev().copied().collect(),
    };
    Ok(PairedSample { first, second })
}

/// Sorted `first_i - second_i`.
pub fn difference(pairs: &PairedSample) -> Sample {
    let d: Vec<f64> = pairs.pairs().map(|(a, b)| a - b).collect();
    Sample::new(d).expect("differences of finite values are finite and non-empty")
}

/// Kendall's tau-b in O(n log n) (Knight's algorithm).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid("kendall tau needs at least two pairs"));
    }
    let mut pts: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let tie_pairs = |run: u64| run * (run - 1) / 2;
    let mut n1 = 0u64;
    let mut n3 = 0u64;
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for w in pts.windows(2) {
        if w[0].0 == w[1].0 {
            run_x += 1;
            if w[0].1 == w[1].1 {
                run_xy += 1;
            } else {
                n3 += tie_pairs(run_xy);
                run_xy = 1;
            }
        } else {
            n1 += tie_pairs(run_x);
            n3 += tie_pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    n1 += tie_pairs(run_x);
    n3 += tie_pairs(run_xy);

    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut n2 = 0u64;
    let mut run_y = 1u64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run_y += 1;
        } else {
            n2 += tie_pairs(run_y);
            run_y = 1;
        }
    }
    n2 += tie_pairs(run_y);

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let denom = (((n0 - n1) as f64) * ((n0 - n2) as f64)).sqrt();
    if denom == 0.0 {
        return Err(Error::invalid("kendall tau undefined for a constant margin"));
    }
    let num = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    Ok(num / denom)
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

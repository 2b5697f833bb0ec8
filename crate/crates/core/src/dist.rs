//! Empirical distributions: sorted samples, step CDFs, generalized inverses
//! and the dispersive-order check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite draws sorted ascending. Never empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        check_values(&values)?;
        values.sort_by(f64::total_cmp);
        Ok(Sample { values })
    }

    /// Takes values already sorted ascending; rejects unsorted input.
    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        check_values(&values)?;
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("sample values are not sorted"));
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; samples hold at least one value.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn sum(&self) -> f64 {
        neumaier_sum(self.values.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    /// Number of values `<= x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.values.partition_point(|&v| v <= x)
    }

    pub fn ecdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.len() as f64
    }

    /// Smallest sample value whose ECDF reaches `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::invalid(format!("probability {p} outside (0, 1]")));
        }
        let n = self.len();
        let nf = n as f64;
        // Same float expression as `ecdf`, so quantile(ecdf(v)) == v exactly.
        let mut k = ((p * nf).ceil() as usize).clamp(1, n);
        while k > 1 && (k - 1) as f64 / nf >= p {
            k -= 1;
        }
        while k < n && (k as f64) / nf < p {
            k += 1;
        }
        Ok(self.values[k - 1])
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a valid probability")
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Self {
        s.values
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid("sample is empty"));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("sample holds non-finite value {bad}")));
    }
    Ok(())
}

/// Compensated summation; exact whenever the running sums are representable.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if f64::abs(sum) >= f64::abs(v) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A sample viewed as a distribution with its support bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDist {
    sample: Sample,
    lower: f64,
    upper: f64,
}

impl EmpiricalDist {
    pub fn new(sample: Sample) -> Self {
        let (lower, upper) = (sample.min(), sample.max());
        EmpiricalDist { sample, lower, upper }
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.sample.ecdf(x)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.sample.quantile(p)
    }
}

impl From<Sample> for EmpiricalDist {
    fn from(sample: Sample) -> Self {
        EmpiricalDist::new(sample)
    }
}

pub fn ecdf_eval(dist: &EmpiricalDist, x: f64) -> f64 {
    dist.cdf(x)
}

pub fn quantile(dist: &EmpiricalDist, p: f64) -> Result<f64> {
    dist.quantile(p)
}

pub fn median_difference(s1: &Sample, s2: &Sample) -> f64 {
    s1.median() - s2.median()
}

/// Strictly increasing probabilities inside (0, 1), at least three of them.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityGrid(Vec<f64>);

impl ProbabilityGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::invalid("probability grid needs at least 3 points"));
        }
        if points.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::invalid("probability grid points must lie in (0, 1)"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("probability grid must be strictly increasing"));
        }
        Ok(ProbabilityGrid(points))
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }
}

impl Default for ProbabilityGrid {
    /// 0.01, 0.02, ..., 0.99.
    fn default() -> Self {
        ProbabilityGrid((1..100).map(|i| i as f64 / 100.0).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderVerdict {
    /// The first sample is smaller in the dispersive order.
    FirstDispSecond,
    /// The second sample is smaller in the dispersive order.
    SecondDispFirst,
    Neither,
    DegenerateEqual,
}

/// Checks monotonicity of `p -> quantile(s1, p) - quantile(s2, p)` on `grid`,
/// with tolerance `1e-9` times the combined sample range.
pub fn dispersive_order_check(s1: &Sample, s2: &Sample, grid: &ProbabilityGrid) -> OrderVerdict {
    let range = s1.max().max(s2.max()) - s1.min().min(s2.min());
    dispersive_order_check_with(s1, s2, grid, 1e-9 * range)
}

pub fn dispersive_order_check_with(s1: &Sample, s2: &Sample, grid: &ProbabilityGrid, tol: f64) -> OrderVerdict {
    let g: Vec<f64> = grid
        .points()
        .iter()
        .map(|&p| s1.quantile(p).unwrap() - s2.quantile(p).unwrap())
        .collect();
    if g.iter().all(|v| v.abs() <= tol) {
        return OrderVerdict::DegenerateEqual;
    }
    let non_decreasing = g.windows(2).all(|w| w[1] >= w[0] - tol);
    let non_increasing = g.windows(2).all(|w| w[1] <= w[0] + tol);
    match (non_decreasing, non_increasing) {
        (true, _) => OrderVerdict::SecondDispFirst,
        (false, true) => OrderVerdict::FirstDispSecond,
        (false, false) => OrderVerdict::Neither,
    }
}

//! Crossing points between empirical CDFs and what they certify.
//!
//! `F_a - F_b` is scanned on the merged grid of both samples. A grid point is
//! strictly signed when `|F_a - F_b| > band`; a crossing sits between two
//! strict points of opposite sign with only neutral points in between. Its
//! location inside that neutral run minimises the total wrong-sign mass on
//! either side, ties going to the rightmost grid point. With `band = 0` this
//! is the first grid point carrying the new sign.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::{dispersive_order_check, median_difference, EmpiricalDist, OrderVerdict, ProbabilityGrid, Sample};
use crate::error::{Error, Result};
use crate::layer::LayerSpec;

/// `max(2/n, 1/sqrt(n))`.
pub fn default_band(n: usize) -> f64 {
    let n = n.max(1) as f64;
    (2.0 / n).max(1.0 / n.sqrt())
}

/// Converts a probability band into a distance on the value axis using the
/// inter-quartile slope of `dist`.
pub fn x_tolerance(dist: &Sample, band: f64) -> f64 {
    let iqr = dist.quantile(0.75).unwrap() - dist.quantile(0.25).unwrap();
    band * iqr / 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// `F_X <= F_Y`.
    Le,
    /// `F_X >= F_Y`.
    Ge,
    /// Both (distributions indistinguishable within the band).
    Both,
}

/// Regions relative to the convex-smaller input `X`.
///
/// `le[0] = (l, d1]` and `ge[0] = [dN, u)`; the remaining entries are the
/// closed intervals between consecutive crossings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLists {
    pub le: Vec<Interval>,
    pub ge: Vec<Interval>,
    lower: f64,
    upper: f64,
}

impl RegionLists {
    fn build(points: &[f64], lower: f64, upper: f64, all_neutral: bool) -> Self {
        if points.is_empty() {
            let whole = vec![Interval::new(lower, upper, false, false)];
            let ge = if all_neutral { whole.clone() } else { Vec::new() };
            return RegionLists {
                le: whole,
                ge,
                lower,
                upper,
            };
        }
        let n = points.len();
        // Segment s spans (d_s, d_{s+1}); segment 0 is F_X <= F_Y.
        let seg = |s: usize| {
            let (lo, lo_closed) = if s == 0 { (lower, false) } else { (points[s - 1], true) };
            let (hi, hi_closed) = if s == n { (upper, false) } else { (points[s], true) };
            Interval::new(lo, hi, lo_closed, hi_closed)
        };
        let le: Vec<Interval> = (0..=n).step_by(2).map(seg).collect();
        let mut ge: Vec<Interval> = (1..=n).step_by(2).map(seg).collect();
        if n % 2 == 1 {
            // The tail segment is a >= region and is listed first.
            ge.rotate_right(1);
        }
        RegionLists { le, ge, lower, upper }
    }

    /// Region family holding both `x` and `y`, if any. The outer regions
    /// extend past the support, where both CDFs are 0 or 1.
    pub fn common_region(&self, x: f64, y: f64) -> Option<RegionKind> {
        let widen = |r: &Interval| Interval {
            lo: if r.lo == self.lower && !r.lo_closed {
                f64::NEG_INFINITY
            } else {
                r.lo
            },
            hi: if r.hi == self.upper && !r.hi_closed {
                f64::INFINITY
            } else {
                r.hi
            },
            ..*r
        };
        let hit = |list: &[Interval]| list.iter().map(widen).any(|r| r.contains(x) && r.contains(y));
        match (hit(&self.le), hit(&self.ge)) {
            (true, true) => Some(RegionKind::Both),
            (true, false) => Some(RegionKind::Le),
            (false, true) => Some(RegionKind::Ge),
            (false, false) => None,
        }
    }
}

/// Which input of [`detect_crossings`] is smaller in convex order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FirstSmaller,
    SecondSmaller,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingSet {
    points: Vec<f64>,
    /// Sign of `F_a - F_b` before the first crossing; 0 if never beyond the band.
    first_sign: i8,
    band: f64,
    lower: f64,
    upper: f64,
    regions: RegionLists,
}

impl CrossingSet {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn n_crossings(&self) -> usize {
        self.points.len()
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn first_sign(&self) -> i8 {
        self.first_sign
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// The single crossing, when there is exactly one.
    pub fn unique(&self) -> Option<f64> {
        match self.points.as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }

    /// `D_<=` regions, oriented so that the input whose CDF starts lower is `X`.
    pub fn regions_le(&self) -> &[Interval] {
        &self.regions.le
    }

    /// `D_>=` regions, same orientation as [`CrossingSet::regions_le`].
    pub fn regions_ge(&self) -> &[Interval] {
        &self.regions.ge
    }
}

/// Scans `F_a - F_b` and records its band-separated sign changes.
pub fn detect_crossings(a: &EmpiricalDist, b: &EmpiricalDist, band: f64) -> Result<CrossingSet> {
    if !(band >= 0.0 && band.is_finite()) {
        return Err(Error::invalid(format!(
            "band {band} must be a finite non-negative number"
        )));
    }
    let (va, vb) = (a.sample().values(), b.sample().values());
    let (na, nb) = (va.len() as i128, vb.len() as i128);
    // F_a - F_b = num / (na * nb), kept as an exact integer.
    let threshold = band * (na * nb) as f64;

    let mut grid: Vec<f64> = Vec::with_capacity(va.len() + vb.len());
    let mut nums: Vec<i128> = Vec::with_capacity(va.len() + vb.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < va.len() || j < vb.len() {
        let x = match (va.get(i), vb.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < va.len() && va[i] <= x {
            i += 1;
        }
        while j < vb.len() && vb[j] <= x {
            j += 1;
        }
        grid.push(x);
        nums.push(i as i128 * nb - j as i128 * na);
    }
    let strict = |num: i128| -> i8 {
        if (num as f64).abs() > threshold {
            num.signum() as i8
        } else {
            0
        }
    };

    let mut points = Vec::new();
    let mut first_sign = 0i8;
    let mut last: Option<(usize, i8)> = None;
    for k in 0..grid.len() {
        let s = strict(nums[k]);
        if s == 0 {
            continue;
        }
        match last {
            None => first_sign = s,
            Some((i, sigma)) if sigma != s => points.push(grid[split_point(&nums, i, k, s)]),
            _ => {}
        }
        last = Some((k, s));
    }

    let (lower, upper) = (grid[0], grid[grid.len() - 1]);
    let regions = RegionLists::build(&points, lower, upper, first_sign == 0);
    Ok(CrossingSet {
        points,
        first_sign,
        band,
        lower,
        upper,
        regions,
    })
}

/// Location of a crossing between strict points `i` (old sign) and `k`
/// (new sign `nu`): the index in `i+1..=k` minimising wrong-sign mass,
/// rightmost on ties.
fn split_point(nums: &[i128], i: usize, k: usize, nu: i8) -> usize {
    let nu = nu as i128;
    // cost(c) = sum_{m in i+1..c} max(nu*num_m, 0) + sum_{m in c..k} max(-nu*num_m, 0)
    let mut cost: i128 = (i + 1..k).map(|m| (-nu * nums[m]).max(0)).sum();
    let (mut best, mut best_cost) = (i + 1, cost);
    for c in i + 2..=k {
        let m = c - 1;
        cost += (nu * nums[m]).max(0) - (-nu * nums[m]).max(0);
        if cost <= best_cost {
            best = c;
            best_cost = cost;
        }
    }
    best
}

/// Region lists of `cs` with the convex-smaller input named by `direction`.
pub fn classify_regions(cs: &CrossingSet, direction: Direction) -> Result<RegionLists> {
    let expected = match direction {
        Direction::FirstSmaller => -1,
        Direction::SecondSmaller => 1,
    };
    if cs.first_sign != 0 && cs.first_sign != expected {
        return Err(Error::invalid(format!(
            "direction {direction:?} contradicts the observed first region (sign {})",
            cs.first_sign
        )));
    }
    Ok(cs.regions.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegime {
    /// `E r(I^c) <= E r(I) <= E r(I^cm)`.
    Preserved,
    /// `E r(I^cm) <= E r(I) <= E r(I^c)`.
    Reversed,
    BothUpper,
    BothLower,
    OnlyCmUpper,
    OnlyCUpper,
    OnlyCmLower,
    OnlyCLower,
    Ambiguous,
}

impl BoundRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundRegime::Preserved => "preserved",
            BoundRegime::Reversed => "reversed",
            BoundRegime::BothUpper => "both_upper",
            BoundRegime::BothLower => "both_lower",
            BoundRegime::OnlyCmUpper => "only_cm_upper",
            BoundRegime::OnlyCUpper => "only_c_upper",
            BoundRegime::OnlyCmLower => "only_cm_lower",
            BoundRegime::OnlyCLower => "only_c_lower",
            BoundRegime::Ambiguous => "ambiguous",
        }
    }
}

impl fmt::Display for BoundRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which side an extreme transform bounds `E r(I)` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Upper,
    Lower,
    Equal,
    Unknown,
}

fn side(cs: &CrossingSet, layer: &LayerSpec, le_means: Side, ge_means: Side) -> Side {
    match classify_regions(cs, Direction::FirstSmaller) {
        Err(_) => Side::Unknown,
        Ok(r) => match r.common_region(layer.delta(), layer.epsilon()) {
            Some(RegionKind::Le) => le_means,
            Some(RegionKind::Ge) => ge_means,
            Some(RegionKind::Both) => Side::Equal,
            None => Side::Unknown,
        },
    }
}

/// Bound regime for `layer` given crossings of `(I^c, I)` and `(I, I^cm)`,
/// each computed with the convex-smaller sample first.
pub fn bound_regime(cs_c: &CrossingSet, cs_cm: &CrossingSet, layer: &LayerSpec) -> BoundRegime {
    use Side::*;
    // (I^c, I): D_<= gives E r(I) <= E r(I^c), so I^c bounds from above.
    let c = side(cs_c, layer, Upper, Lower);
    // (I, I^cm): D_<= gives E r(I^cm) <= E r(I), so I^cm bounds from below.
    let cm = side(cs_cm, layer, Lower, Upper);
    match (cm, c) {
        (Upper, Lower) | (Upper, Equal) | (Equal, Lower) | (Equal, Equal) => BoundRegime::Preserved,
        (Lower, Upper) | (Lower, Equal) | (Equal, Upper) => BoundRegime::Reversed,
        (Upper, Upper) => BoundRegime::BothUpper,
        (Lower, Lower) => BoundRegime::BothLower,
        (Upper, Unknown) | (Equal, Unknown) => BoundRegime::OnlyCmUpper,
        (Lower, Unknown) => BoundRegime::OnlyCmLower,
        (Unknown, Upper) => BoundRegime::OnlyCUpper,
        (Unknown, Lower) | (Unknown, Equal) => BoundRegime::OnlyCLower,
        (Unknown, Unknown) => BoundRegime::Ambiguous,
    }
}

/// Unique crossings of `(I^c, I)`, `(I, I^cm)` and `(I^c, I^cm)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CrossingTriple {
    pub d_c: Option<f64>,
    pub d_cm: Option<f64>,
    pub d_star: Option<f64>,
}

impl CrossingTriple {
    pub fn from_sets(cs_c: &CrossingSet, cs_cm: &CrossingSet, cs_star: &CrossingSet) -> Self {
        CrossingTriple {
            d_c: cs_c.unique(),
            d_cm: cs_cm.unique(),
            d_star: cs_star.unique(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.d_c.is_some() && self.d_cm.is_some() && self.d_star.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingOrder {
    /// `d^c < d* < d^cm`.
    CStarCm,
    /// `d^cm < d* < d^c`.
    CmStarC,
    Coincide,
    Violation,
}

impl CrossingOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            CrossingOrder::CStarCm => "c_star_cm",
            CrossingOrder::CmStarC => "cm_star_c",
            CrossingOrder::Coincide => "coincide",
            CrossingOrder::Violation => "violation",
        }
    }
}

impl fmt::Display for CrossingOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies the ordering of a complete triple; `band` is a distance on the
/// value axis.
pub fn crossing_order(triple: &CrossingTriple, band: f64) -> Result<CrossingOrder> {
    let (Some(c), Some(s), Some(m)) = (triple.d_c, triple.d_star, triple.d_cm) else {
        return Err(Error::invalid("crossing triple is missing a point"));
    };
    if band.is_nan() || band < 0.0 {
        return Err(Error::invalid(format!("band {band} must be non-negative")));
    }
    let near = |x: f64, y: f64| (x - y).abs() <= band;
    Ok(if near(c, s) && near(s, m) && near(c, m) {
        CrossingOrder::Coincide
    } else if c <= s + band && s <= m + band && m - c > band {
        CrossingOrder::CStarCm
    } else if m <= s + band && s <= c + band && c - m > band {
        CrossingOrder::CmStarC
    } else {
        CrossingOrder::Violation
    })
}

/// Median difference when the samples are dispersively ordered (or equal),
/// which is then the unique crossing of the comonotone and countermonotone
/// difference CDFs.
pub fn dispersive_shortcut(s1: &Sample, s2: &Sample) -> Option<f64> {
    if s1.len() != s2.len() {
        return None;
    }
    match dispersive_order_check(s1, s2, &ProbabilityGrid::default()) {
        OrderVerdict::Neither => None,
        _ => Some(median_difference(s1, s2)),
    }
}

/// `I_i = mu_i + sigma_i * W_i` with `W_i` symmetric about zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricLocationScaleSpec {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    base: Sample,
}

/// Largest `|q(p) + q(1-p)|` over the default grid, relative to the 1%-99%
/// quantile range.
pub fn symmetry_gap(base: &Sample) -> f64 {
    let grid = ProbabilityGrid::default();
    let q = |p: f64| base.quantile(p).unwrap();
    let range = q(0.99) - q(0.01);
    if range == 0.0 {
        return if q(0.5) == 0.0 { 0.0 } else { f64::INFINITY };
    }
    grid.points()
        .iter()
        .map(|&p| (q(p) + q(1.0 - p)).abs() / range)
        .fold(0.0, f64::max)
}

impl SymmetricLocationScaleSpec {
    /// Rejects non-positive scales and bases whose [`symmetry_gap`] exceeds 0.05.
    pub fn new(mu1: f64, mu2: f64, sigma1: f64, sigma2: f64, base: Sample) -> Result<Self> {
        if !(sigma1 > 0.0 && sigma2 > 0.0) {
            return Err(Error::invalid("scales must be positive"));
        }
        if !(mu1.is_finite() && mu2.is_finite() && sigma1.is_finite() && sigma2.is_finite()) {
            return Err(Error::invalid("locations and scales must be finite"));
        }
        let gap = symmetry_gap(&base);
        if gap > 0.05 {
            return Err(Error::invalid(format!(
                "base sample is not symmetric about 0 (gap {gap:.3})"
            )));
        }
        Ok(SymmetricLocationScaleSpec {
            mu1,
            mu2,
            sigma1,
            sigma2,
            base,
        })
    }

    pub fn base(&self) -> &Sample {
        &self.base
    }

    /// Both marginals built from the shared base sample.
    pub fn marginals(&self) -> (Sample, Sample) {
        let map = |mu: f64, sigma: f64| {
            Sample::from_sorted(self.base.values().iter().map(|w| mu + sigma * w).collect())
                .expect("affine map with positive scale keeps order")
        };
        (map(self.mu1, self.sigma1), map(self.mu2, self.sigma2))
    }
}

/// The common crossing `mu1 - mu2`.
pub fn symmetric_common_crossing(spec: &SymmetricLocationScaleSpec) -> f64 {
    spec.mu1 - spec.mu2
}

#[cfg(test)]
mod tests;

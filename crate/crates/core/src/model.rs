//! Scenario instances, step distributions and closed intervals.
//!
//! A [`DiscreteInstance`] is a finite weighted list of scenarios, each carrying
//! the interval `[lower, upper]` that the latent variable is known to lie in.
//! It stands in for the non-atomic probability space: wherever a construction
//! needs to split mass, a scenario's weight is split between several values.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Tolerance used when comparing probability masses against levels.
pub const MASS_TOL: f64 = 1e-12;

/// Inversions `lower > upper` smaller than this are snapped shut.
pub const INVERSION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub lower: f64,
    pub upper: f64,
    pub weight: f64,
}

impl Scenario {
    pub const fn new(lower: f64, upper: f64, weight: f64) -> Self {
        Scenario { lower, upper, weight }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn endpoint(&self, side: Side) -> f64 {
        match side {
            Side::Lower => self.lower,
            Side::Upper => self.upper,
        }
    }
}

/// Which endpoint of the random interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

/// A validated, normalized scenario list. Weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInstance {
    scenarios: Vec<Scenario>,
}

impl DiscreteInstance {
    /// Validates and normalizes `scenarios`; see [`normalize`].
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self> {
        normalize(scenarios)
    }

    /// Builds an instance from `(lower, upper, weight)` triples.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        normalize(triples.iter().map(|&(l, u, w)| Scenario::new(l, u, w)).collect())
    }

    /// Equal-weight instance from `(lower, upper)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        normalize(pairs.iter().map(|&(l, u)| Scenario::new(l, u, 1.0)).collect())
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    /// Always false; an instance cannot be empty.
    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    /// `E(y_L)` or `E(y_U)`.
    pub fn endpoint_mean(&self, side: Side) -> f64 {
        self.scenarios.iter().map(|s| s.weight * s.endpoint(side)).sum()
    }

    /// Law of `y_L` or `y_U` as a step distribution.
    pub fn marginal_law(&self, side: Side) -> StepDistribution {
        marginal_law(self, side)
    }

    /// Total weight of scenarios satisfying `pred`.
    pub fn mass_where<F: Fn(&Scenario) -> bool>(&self, pred: F) -> f64 {
        self.scenarios.iter().filter(|s| pred(s)).map(|s| s.weight).sum()
    }

    /// Largest absolute endpoint, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.scenarios
            .iter()
            .fold(1.0f64, |acc, s| acc.max(libm::fabs(s.lower)).max(libm::fabs(s.upper)))
    }
}

/// Validates the scenarios and rescales their weights to sum to one.
///
/// Scenario order is preserved. An inversion `lower > upper` of at most
/// [`INVERSION_TOL`] is treated as a degenerate interval.
pub fn normalize(mut scenarios: Vec<Scenario>) -> Result<DiscreteInstance> {
    if scenarios.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let mut total = 0.0;
    for (index, s) in scenarios.iter_mut().enumerate() {
        if !(s.lower.is_finite() && s.upper.is_finite() && s.weight.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if s.weight <= 0.0 {
            return Err(Error::NonpositiveWeight { index, weight: s.weight });
        }
        if s.lower > s.upper {
            if s.lower - s.upper > INVERSION_TOL {
                return Err(Error::InvertedInterval { index, lower: s.lower, upper: s.upper });
            }
            s.upper = s.lower;
        }
        total += s.weight;
    }
    if total != 1.0 {
        for s in scenarios.iter_mut() {
            s.weight /= total;
        }
    }
    Ok(DiscreteInstance { scenarios })
}

/// Law of one endpoint: distinct endpoint values with aggregated weights.
pub fn marginal_law(instance: &DiscreteInstance, side: Side) -> StepDistribution {
    StepDistribution::from_weighted(
        instance.scenarios().iter().map(|s| (s.endpoint(side), s.weight)),
    )
    .expect("instance weights are positive")
}

/// A discrete law with finitely many atoms.
///
/// The CDF is the right-continuous step function `F(t) = P(Z <= t)` and
/// [`quantile`](Self::quantile) is its left-continuous generalized inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    values: Vec<f64>,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepDistribution {
    /// Sorts, merges equal values and normalizes. Zero masses are dropped.
    pub fn from_weighted<I: IntoIterator<Item = (f64, f64)>>(atoms: I) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for (index, (v, w)) in atoms.into_iter().enumerate() {
            if !(v.is_finite() && w.is_finite()) {
                return Err(Error::NonFinite { index });
            }
            if w < 0.0 {
                return Err(Error::NonpositiveWeight { index, weight: w });
            }
            if w > 0.0 {
                pairs.push((v, w));
            }
        }
        if pairs.is_empty() {
            return Err(Error::EmptyInstance);
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut masses: Vec<f64> = Vec::with_capacity(pairs.len());
        for (v, w) in pairs {
            match values.last() {
                Some(&last) if last == v => *masses.last_mut().unwrap() += w,
                _ => {
                    values.push(v);
                    masses.push(w);
                }
            }
        }
        let total: f64 = masses.iter().sum();
        if total != 1.0 {
            for m in masses.iter_mut() {
                *m /= total;
            }
        }
        let mut cumulative = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for &m in &masses {
            acc += m;
            cumulative.push(acc);
        }
        Ok(StepDistribution { values, masses, cumulative })
    }

    pub fn point_mass(value: f64) -> Self {
        StepDistribution { values: alloc::vec![value], masses: alloc::vec![1.0], cumulative: alloc::vec![1.0] }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.masses.iter().copied())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(v, m)| v * m).sum()
    }

    /// `P(Z <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        // number of atoms <= t
        let k = self.values.partition_point(|&v| v <= t);
        if k == 0 { 0.0 } else { self.cumulative[k - 1].min(1.0) }
    }

    /// `P(Z < t)`.
    pub fn cdf_left(&self, t: f64) -> f64 {
        let k = self.values.partition_point(|&v| v < t);
        if k == 0 { 0.0 } else { self.cumulative[k - 1].min(1.0) }
    }

    /// Left-continuous generalized inverse `inf{t : F(t) >= alpha}`.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        Ok(self.quantile_unchecked(alpha))
    }

    pub(crate) fn quantile_unchecked(&self, alpha: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c < alpha - MASS_TOL);
        self.values[k.min(self.values.len() - 1)]
    }

    /// The set of medians `{m : P(Z <= m) >= 1/2, P(Z >= m) >= 1/2}`.
    pub fn median_set(&self) -> ClosedInterval {
        let lo = self.quantile_unchecked(0.5);
        // Largest atom v with P(Z >= v) >= 1/2.
        let mut hi = lo;
        for (i, &v) in self.values.iter().enumerate().rev() {
            let before = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
            if 1.0 - before >= 0.5 - MASS_TOL {
                hi = v;
                break;
            }
        }
        ClosedInterval::new(lo, hi.max(lo))
    }

    /// `integral_0^beta Q(u) du` for `beta` in `[0, 1]`, by exact summation.
    pub fn partial_quantile_integral(&self, beta: f64) -> f64 {
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (&v, &c) in self.values.iter().zip(self.cumulative.iter()) {
            if prev >= beta {
                break;
            }
            let top = if c < beta { c } else { beta };
            acc += v * (top - prev);
            prev = c;
        }
        acc
    }
}

/// An ordered pair `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ClosedInterval {
    /// # Panics
    /// If `lo > hi` or either end is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        ClosedInterval { lo, hi }
    }

    pub fn try_new(lo: f64, hi: f64) -> Option<Self> {
        if lo <= hi { Some(ClosedInterval { lo, hi }) } else { None }
    }

    pub const fn point(x: f64) -> Self {
        ClosedInterval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Containment with an absolute slack.
    pub fn contains_within(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    pub fn is_subset_of(&self, other: &ClosedInterval, tol: f64) -> bool {
        other.lo - tol <= self.lo && self.hi <= other.hi + tol
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &ClosedInterval) -> ClosedInterval {
        ClosedInterval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Clips `self` into `outer`; the result is never inverted.
    pub fn clip_to(&self, outer: &ClosedInterval) -> ClosedInterval {
        let lo = self.lo.max(outer.lo).min(outer.hi);
        let hi = self.hi.min(outer.hi).max(lo);
        ClosedInterval { lo, hi }
    }

    pub fn max_abs_diff(&self, other: &ClosedInterval) -> f64 {
        libm::fabs(self.lo - other.lo).max(libm::fabs(self.hi - other.hi))
    }
}

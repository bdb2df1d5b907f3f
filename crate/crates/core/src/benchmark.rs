//! Unrestricted ranges and the selections that attain them.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{ClosedInterval, DiscreteInstance, Side, StepDistribution, MASS_TOL};
use crate::{Error, Result};

/// One piece of a scenario's mass placed at `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Choice {
    pub value: f64,
    pub weight: f64,
}

impl Choice {
    pub const fn new(value: f64, weight: f64) -> Self {
        Choice { value, weight }
    }
}

/// A selection on a finite instance.
///
/// Each scenario's weight is cut into consecutive segments, each carrying one
/// value from that scenario's interval. Several segments encode a split of the
/// scenario's mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    choices: Vec<Vec<Choice>>,
}

impl Selection {
    /// Builds a selection without checking it against an instance.
    pub fn from_choices(choices: Vec<Vec<Choice>>) -> Self {
        Selection { choices }
    }

    /// One value per scenario, carrying the full scenario weight.
    pub fn from_values(instance: &DiscreteInstance, values: &[f64]) -> Result<Self> {
        if values.len() != instance.len() {
            return Err(Error::SelectionMismatch("length differs from instance"));
        }
        let choices = instance
            .scenarios()
            .iter()
            .zip(values)
            .map(|(s, &v)| vec![Choice::new(v, s.weight)])
            .collect();
        let sel = Selection { choices };
        sel.validate(instance)?;
        Ok(sel)
    }

    /// `y = y_L` or `y = y_U`.
    pub fn endpoint(instance: &DiscreteInstance, side: Side) -> Self {
        let choices = instance
            .scenarios()
            .iter()
            .map(|s| vec![Choice::new(s.endpoint(side), s.weight)])
            .collect();
        Selection { choices }
    }

    pub fn choices(&self) -> &[Vec<Choice>] {
        &self.choices
    }

    pub fn into_choices(self) -> Vec<Vec<Choice>> {
        self.choices
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.choices.iter().flatten().map(|c| c.value * c.weight).sum()
    }

    /// Total mass of choices whose value satisfies `pred`.
    pub fn mass_where<F: Fn(f64) -> bool>(&self, pred: F) -> f64 {
        self.choices.iter().flatten().filter(|c| pred(c.value)).map(|c| c.weight).sum()
    }

    /// The step law of the selected values.
    pub fn law(&self) -> StepDistribution {
        StepDistribution::from_weighted(self.choices.iter().flatten().map(|c| (c.value, c.weight)))
            .expect("selection has positive total weight")
    }

    /// Checks that every value lies in its scenario interval and that the
    /// segment weights add up to the scenario weight.
    pub fn validate(&self, instance: &DiscreteInstance) -> Result<()> {
        if self.choices.len() != instance.len() {
            return Err(Error::SelectionMismatch("length differs from instance"));
        }
        let tol = 1e-12 * instance.scale();
        for (s, cs) in instance.scenarios().iter().zip(&self.choices) {
            if cs.is_empty() {
                return Err(Error::SelectionMismatch("scenario without a choice"));
            }
            let mut total = 0.0;
            for c in cs {
                if !(c.weight > 0.0) {
                    return Err(Error::SelectionMismatch("nonpositive subweight"));
                }
                if !(c.value >= s.lower - tol && c.value <= s.upper + tol) {
                    return Err(Error::SelectionMismatch("value outside its interval"));
                }
                total += c.weight;
            }
            if libm::fabs(total - s.weight) > 1e-12 {
                return Err(Error::SelectionMismatch("subweights do not add up"));
            }
        }
        Ok(())
    }

    /// Pointwise convex combination `theta * a + (1 - theta) * b`.
    ///
    /// Segments of the two selections are aligned on a common refinement of
    /// each scenario's mass.
    pub fn pointwise_mix(a: &Selection, b: &Selection, theta: f64) -> Result<Selection> {
        check_theta(theta)?;
        if a.len() != b.len() {
            return Err(Error::SelectionMismatch("selections have different lengths"));
        }
        let choices = a
            .choices
            .iter()
            .zip(&b.choices)
            .map(|(ca, cb)| refine(ca, cb, |x, y| theta * x + (1.0 - theta) * y))
            .collect();
        Ok(Selection { choices })
    }

    /// Law-level mixture: each scenario gives share `theta` of its mass to
    /// `a`'s choices and the rest to `b`'s.
    pub fn mixture(a: &Selection, b: &Selection, theta: f64) -> Result<Selection> {
        check_theta(theta)?;
        if a.len() != b.len() {
            return Err(Error::SelectionMismatch("selections have different lengths"));
        }
        let choices = a
            .choices
            .iter()
            .zip(&b.choices)
            .map(|(ca, cb)| {
                let mut out = Vec::with_capacity(ca.len() + cb.len());
                if theta > 0.0 {
                    out.extend(ca.iter().map(|c| Choice::new(c.value, theta * c.weight)));
                }
                if theta < 1.0 {
                    out.extend(cb.iter().map(|c| Choice::new(c.value, (1.0 - theta) * c.weight)));
                }
                out
            })
            .collect();
        Ok(Selection { choices })
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) { Ok(()) } else { Err(Error::ThetaOutOfRange(theta)) }
}

/// Walks two segmentations of the same mass and combines aligned values.
fn refine<F: Fn(f64, f64) -> f64>(a: &[Choice], b: &[Choice], f: F) -> Vec<Choice> {
    let total: f64 = a.iter().map(|c| c.weight).sum();
    let ends = |cs: &[Choice]| {
        let mut acc = 0.0;
        let mut e: Vec<f64> = cs.iter().map(|c| { acc += c.weight; acc }).collect();
        *e.last_mut().unwrap() = total;
        e
    };
    let (ea, eb) = (ends(a), ends(b));
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j, mut start) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        let end = ea[i].min(eb[j]);
        if end > start {
            out.push(Choice::new(f(a[i].value, b[j].value), end - start));
            start = end;
        }
        if ea[i] <= end {
            i += 1;
        }
        if eb[j] <= end {
            j += 1;
        }
    }
    merge_equal(out)
}

fn merge_equal(choices: Vec<Choice>) -> Vec<Choice> {
    let mut out: Vec<Choice> = Vec::with_capacity(choices.len());
    for c in choices {
        match out.last_mut() {
            Some(last) if last.value == c.value => last.weight += c.weight,
            _ => out.push(c),
        }
    }
    out
}

/// Laws of `y_L` (hitting) and `y_U` (containment) on half-lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityFunctionals {
    /// `T_Y((-inf, t]) = P(y_L <= t)`.
    pub hitting: StepDistribution,
    /// `C_Y((-inf, t]) = P(y_U <= t)`.
    pub containment: StepDistribution,
}

pub fn capacity_functionals(instance: &DiscreteInstance) -> CapacityFunctionals {
    CapacityFunctionals {
        hitting: instance.marginal_law(Side::Lower),
        containment: instance.marginal_law(Side::Upper),
    }
}

/// `[E y_L, E y_U]`.
pub fn aumann_interval(instance: &DiscreteInstance) -> ClosedInterval {
    let lo = instance.endpoint_mean(Side::Lower);
    let hi = instance.endpoint_mean(Side::Upper);
    ClosedInterval::new(lo, hi.max(lo))
}

/// `[Med(y_L), Med(y_U)]`, with `Med` the left-continuous quantile at 1/2.
pub fn median_benchmark(instance: &DiscreteInstance) -> ClosedInterval {
    quantile_attainability_range(instance, 0.5).expect("1/2 is a valid level")
}

/// The affine selection `(1 - t) y_L + t y_U` with mean `kappa`.
pub fn mean_selection(instance: &DiscreteInstance, kappa: f64) -> Result<Selection> {
    let aumann = aumann_interval(instance);
    if !aumann.contains(kappa) {
        return Err(Error::KappaInfeasible { kappa, lo: aumann.lo, hi: aumann.hi });
    }
    let span = aumann.hi - aumann.lo;
    let t = if span > 0.0 { ((kappa - aumann.lo) / span).clamp(0.0, 1.0) } else { 0.0 };
    let choices = instance
        .scenarios()
        .iter()
        .map(|s| {
            let v = if t == 1.0 { s.upper } else { (1.0 - t) * s.lower + t * s.upper };
            vec![Choice::new(v, s.weight)]
        })
        .collect();
    Ok(Selection { choices })
}

/// `[T^{-1}(alpha), C^{-1}(alpha)]`: the values `m` that some selection has as
/// its `alpha`-quantile.
pub fn quantile_attainability_range(instance: &DiscreteInstance, alpha: f64) -> Result<ClosedInterval> {
    let lo = instance.marginal_law(Side::Lower).quantile(alpha)?;
    let hi = instance.marginal_law(Side::Upper).quantile(alpha)?;
    Ok(ClosedInterval::new(lo, hi.max(lo)))
}

/// A selection whose `alpha`-quantile is exactly `m`.
///
/// Scenarios entirely at or below `m` take `upper`, scenarios entirely above
/// take `lower`, and the rest take `m`. Inside the straddling group the first
/// `(alpha - P(upper <= m))_+` of mass (in instance order) is recorded as a
/// separate segment, splitting at most one scenario.
pub fn quantile_selection(instance: &DiscreteInstance, alpha: f64, m: f64) -> Result<Selection> {
    let range = quantile_attainability_range(instance, alpha)?;
    if !range.contains(m) {
        return Err(Error::MOutOfRange { m, lo: range.lo, hi: range.hi });
    }
    let p_below = instance.mass_where(|s| s.upper <= m);
    let mut delta = (alpha - p_below).max(0.0);
    let choices = instance
        .scenarios()
        .iter()
        .map(|s| {
            if s.upper <= m {
                vec![Choice::new(s.upper, s.weight)]
            } else if s.lower > m {
                vec![Choice::new(s.lower, s.weight)]
            } else if delta <= 0.0 || delta >= s.weight {
                delta = (delta - s.weight).max(0.0);
                vec![Choice::new(m, s.weight)]
            } else {
                let below = delta;
                delta = 0.0;
                vec![Choice::new(m, below), Choice::new(m, s.weight - below)]
            }
        })
        .collect();
    Ok(Selection { choices })
}

/// Exact statistics of a selection's law.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionStats {
    pub mean: f64,
    pub law: StepDistribution,
}

impl SelectionStats {
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        self.law.quantile(alpha)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.law.cdf(t)
    }

    /// Whether `m` is a median, with the mass tolerance of [`MASS_TOL`].
    pub fn has_median(&self, m: f64) -> bool {
        self.law.cdf(m) >= 0.5 - MASS_TOL && 1.0 - self.law.cdf_left(m) >= 0.5 - MASS_TOL
    }
}

pub fn selection_stats(instance: &DiscreteInstance, selection: &Selection) -> Result<SelectionStats> {
    selection.validate(instance)?;
    Ok(SelectionStats { mean: selection.mean(), law: selection.law() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> DiscreteInstance {
        DiscreteInstance::from_triples(&[(-2.0, 0.0, 0.5), (0.0, 2.0, 0.5)]).unwrap()
    }

    fn unit() -> DiscreteInstance {
        DiscreteInstance::from_triples(&[(0.0, 1.0, 1.0)]).unwrap()
    }

    #[test]
    fn aumann_and_median_benchmarks() {
        assert_eq!(aumann_interval(&two_state()), ClosedInterval::new(-1.0, 1.0));
        assert_eq!(aumann_interval(&unit()), ClosedInterval::new(0.0, 1.0));
        assert_eq!(median_benchmark(&two_state()), ClosedInterval::new(-2.0, 0.0));
        assert_eq!(median_benchmark(&unit()), ClosedInterval::new(0.0, 1.0));
    }

    #[test]
    fn mean_selection_is_affine() {
        let sel = mean_selection(&unit(), 0.25).unwrap();
        assert_eq!(sel.choices()[0], vec![Choice::new(0.25, 1.0)]);
        let sel = mean_selection(&two_state(), 0.0).unwrap();
        let values: Vec<f64> = sel.choices().iter().map(|c| c[0].value).collect();
        assert_eq!(values, vec![-1.0, 1.0]);
        assert_eq!(sel.mean(), 0.0);
        let sel = mean_selection(&two_state(), 1.0).unwrap();
        assert_eq!(sel, Selection::endpoint(&two_state(), Side::Upper));
        assert!(matches!(mean_selection(&unit(), 1.5), Err(Error::KappaInfeasible { .. })));
    }

    #[test]
    fn attainability_ranges() {
        assert_eq!(quantile_attainability_range(&two_state(), 0.5).unwrap(), ClosedInterval::new(-2.0, 0.0));
        for &a in &[0.1, 0.5, 0.9] {
            assert_eq!(quantile_attainability_range(&unit(), a).unwrap(), ClosedInterval::new(0.0, 1.0));
        }
    }

    #[test]
    fn quantile_selection_examples() {
        let sel = quantile_selection(&unit(), 0.5, 0.3).unwrap();
        assert_eq!(sel.choices()[0], vec![Choice::new(0.3, 0.5), Choice::new(0.3, 0.5)]);
        assert_eq!(selection_stats(&unit(), &sel).unwrap().quantile(0.5).unwrap(), 0.3);

        let inst = two_state();
        let sel = quantile_selection(&inst, 0.5, -1.0).unwrap();
        assert_eq!(sel.choices()[0][0].value, -1.0);
        assert!(sel.mass_where(|v| v <= -1.0) >= 0.5);
        assert_eq!(sel.law().quantile(0.5).unwrap(), -1.0);

        let sel = quantile_selection(&inst, 0.5, -2.0).unwrap();
        assert_eq!(sel.law().quantile(0.5).unwrap(), -2.0);
        assert!(matches!(quantile_selection(&inst, 0.5, 0.5), Err(Error::MOutOfRange { .. })));
    }

    #[test]
    fn pointwise_mix_refines_segments() {
        let a = Selection::from_choices(vec![vec![Choice::new(0.0, 0.25), Choice::new(1.0, 0.75)]]);
        let b = Selection::from_choices(vec![vec![Choice::new(0.0, 0.5), Choice::new(1.0, 0.5)]]);
        let mix = Selection::pointwise_mix(&a, &b, 0.5).unwrap();
        assert_eq!(
            mix.choices()[0],
            vec![Choice::new(0.0, 0.25), Choice::new(0.5, 0.25), Choice::new(1.0, 0.5)]
        );
        assert!((mix.mean() - 0.5 * (a.mean() + b.mean())).abs() < 1e-15);
    }

    #[test]
    fn mixture_scales_weights() {
        let inst = unit();
        let lo = Selection::endpoint(&inst, Side::Lower);
        let hi = Selection::endpoint(&inst, Side::Upper);
        let mix = Selection::mixture(&lo, &hi, 0.25).unwrap();
        assert_eq!(mix.choices()[0], vec![Choice::new(0.0, 0.25), Choice::new(1.0, 0.75)]);
        assert_eq!(Selection::mixture(&lo, &hi, 1.0).unwrap(), lo);
        assert!(Selection::mixture(&lo, &hi, 1.5).is_err());
    }

    #[test]
    fn validate_rejects_bad_selections() {
        let inst = unit();
        let bad = Selection::from_choices(vec![vec![Choice::new(2.0, 1.0)]]);
        assert!(bad.validate(&inst).is_err());
        let bad = Selection::from_choices(vec![vec![Choice::new(0.5, 0.4)]]);
        assert!(bad.validate(&inst).is_err());
        assert!(selection_stats(&inst, &Selection::endpoint(&inst, Side::Lower)).is_ok());
    }

    #[test]
    fn capacity_dominates_containment() {
        let cap = capacity_functionals(&two_state());
        for t in [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0] {
            assert!(cap.hitting.cdf(t) >= cap.containment.cdf(t));
        }
    }
}

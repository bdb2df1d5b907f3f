//! Mean bounds under a fixed `alpha`-quantile.
//!
//! `F_y^{-1}(alpha) = q` holds iff `P(y < q) < alpha <= P(y <= q)`. The upper
//! end of the mean range moves the cheapest scenarios straddling `q` down to
//! `q` until mass `alpha` sits at or below it; the lower end mirrors this with
//! mass `1 - alpha` at or above `q`. At `alpha = 1/2` this is exactly the
//! median computation. The strict inequality makes the lower end a limit that
//! need not be attained, so both ends are reported as a closed interval.

use crate::benchmark::{quantile_attainability_range, Selection};
use crate::median::{bounds_for_partition, extremal_for_partition, partition_at, Extremum};
use crate::model::{ClosedInterval, DiscreteInstance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileRestriction {
    pub alpha: f64,
    pub q: f64,
}

/// Whether `q` lies in `[T^{-1}(alpha), C^{-1}(alpha)]`. Invalid levels give `false`.
pub fn quantile_restriction_feasible(instance: &DiscreteInstance, restriction: &QuantileRestriction) -> bool {
    quantile_attainability_range(instance, restriction.alpha).is_ok_and(|r| r.contains(restriction.q))
}

fn checked(instance: &DiscreteInstance, restriction: &QuantileRestriction) -> Result<()> {
    let range = quantile_attainability_range(instance, restriction.alpha)?;
    if !range.contains(restriction.q) {
        return Err(Error::InfeasibleQuantile {
            alpha: restriction.alpha,
            q: restriction.q,
            lo: range.lo,
            hi: range.hi,
        });
    }
    Ok(())
}

/// Closure of the range of `E y` over selections with `F_y^{-1}(alpha) = q`.
pub fn quantile_restricted_mean_interval(instance: &DiscreteInstance, restriction: &QuantileRestriction) -> Result<ClosedInterval> {
    checked(instance, restriction)?;
    let QuantileRestriction { alpha, q } = *restriction;
    let part = partition_at(instance, q, alpha, 1.0 - alpha);
    Ok(bounds_for_partition(instance, part)?.interval)
}

/// The selection whose mean is the upper (`Max`) or lower end. The upper one
/// satisfies the restriction exactly; the lower one may sit on its boundary
/// with `P(y < q) = alpha`.
pub fn quantile_extremal_selection(
    instance: &DiscreteInstance,
    restriction: &QuantileRestriction,
    side: Extremum,
) -> Result<Selection> {
    checked(instance, restriction)?;
    let QuantileRestriction { alpha, q } = *restriction;
    let part = partition_at(instance, q, alpha, 1.0 - alpha);
    extremal_for_partition(instance, &part, side)
}

/// `F_y^{-1}(alpha) = q` on the selection's step law.
pub fn satisfies_quantile(selection: &Selection, restriction: &QuantileRestriction) -> bool {
    selection.law().quantile(restriction.alpha).is_ok_and(|v| v == restriction.q)
}

/// Law-level mixture of two restricted selections; the quantile is preserved.
pub fn mixture_convexity_check(
    instance: &DiscreteInstance,
    restriction: &QuantileRestriction,
    y1: &Selection,
    y2: &Selection,
    theta: f64,
) -> Result<Selection> {
    y1.validate(instance)?;
    y2.validate(instance)?;
    if !satisfies_quantile(y1, restriction) || !satisfies_quantile(y2, restriction) {
        return Err(Error::RestrictionViolated);
    }
    Selection::mixture(y1, y2, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::quantile_selection;
    use crate::median::median_restricted_mean_interval;

    fn unit() -> DiscreteInstance {
        DiscreteInstance::from_triples(&[(0.0, 1.0, 1.0)]).unwrap()
    }

    #[test]
    fn feasibility_examples() {
        assert!(quantile_restriction_feasible(&unit(), &QuantileRestriction { alpha: 0.3, q: 0.5 }));
        let inst = DiscreteInstance::from_triples(&[(1.0, 2.0, 0.5), (3.0, 4.0, 0.5)]).unwrap();
        assert!(!quantile_restriction_feasible(&inst, &QuantileRestriction { alpha: 0.3, q: 0.5 }));
    }

    #[test]
    fn quarter_quantile_upper_end() {
        let iv = quantile_restricted_mean_interval(&unit(), &QuantileRestriction { alpha: 0.25, q: 0.5 }).unwrap();
        assert_eq!(iv.hi, 0.875);
        assert_eq!(iv.lo, 0.375);
    }

    #[test]
    fn median_coincidence() {
        let inst = DiscreteInstance::from_triples(&[(0.0, 3.0, 0.2), (1.0, 2.0, 0.5), (-1.0, 4.0, 0.3)]).unwrap();
        let a = quantile_restricted_mean_interval(&inst, &QuantileRestriction { alpha: 0.5, q: 1.5 }).unwrap();
        assert_eq!(a, median_restricted_mean_interval(&inst, 1.5).unwrap());
    }

    #[test]
    fn mixture_preserves_quantile() {
        let r = QuantileRestriction { alpha: 0.25, q: 0.5 };
        let y1 = quantile_extremal_selection(&unit(), &r, Extremum::Max).unwrap();
        let y2 = quantile_selection(&unit(), 0.25, 0.5).unwrap();
        assert!(satisfies_quantile(&y1, &r) && satisfies_quantile(&y2, &r));
        for theta in [0.0, 0.5, 1.0] {
            let mix = mixture_convexity_check(&unit(), &r, &y1, &y2, theta).unwrap();
            assert!(satisfies_quantile(&mix, &r));
            let want = theta * y1.mean() + (1.0 - theta) * y2.mean();
            assert!((mix.mean() - want).abs() < 1e-15);
        }
        let bad = Selection::endpoint(&unit(), crate::Side::Upper);
        assert_eq!(mixture_convexity_check(&unit(), &r, &y1, &bad, 0.5), Err(Error::RestrictionViolated));
    }
}

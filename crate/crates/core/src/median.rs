//! Mean bounds for selections with a prescribed median.
//!
//! With `A_- = {y_U < m}`, `A_+ = {y_L > m}` and the contact set
//! `M = {y_L <= m <= y_U}`, a selection has `m` as a median iff the contact set
//! supplies the shortfalls `(1/2 - P(A_-))_+` below and `(1/2 - P(A_+))_+`
//! above `m`. The cheapest way to do that moves the contact scenarios closest
//! to `m` onto `m`, so both endpoints are partial quantile integrals of the
//! gaps `y_U - m` and `m - y_L` over `M`.

use alloc::vec;
use alloc::vec::Vec;

use crate::benchmark::{aumann_interval, quantile_attainability_range, Choice, Selection};
use crate::laws::ParametricLaw;
use crate::model::{ClosedInterval, DiscreteInstance, Side, StepDistribution, MASS_TOL};
use crate::numeric::adaptive_simpson;
use crate::rearrangement::{conditional_quantile_integral, least_x_set, ConditionalLaw, Member};
use crate::{Error, Result};

/// Which end of a restricted mean interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extremum {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianPartition {
    pub m: f64,
    /// `{upper < m}`.
    pub a_minus: Vec<usize>,
    /// `{lower > m}`.
    pub a_plus: Vec<usize>,
    /// `{lower <= m <= upper}`.
    pub contact: Vec<usize>,
    pub p_minus: f64,
    pub p_plus: f64,
    pub p0: f64,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    pub feasible: bool,
}

impl MedianPartition {
    /// `U_m = upper - m` on the contact set.
    pub fn upper_gaps(&self, instance: &DiscreteInstance) -> Vec<Member> {
        self.gaps(instance, |s| s.upper - self.m)
    }

    /// `L_m = m - lower` on the contact set.
    pub fn lower_gaps(&self, instance: &DiscreteInstance) -> Vec<Member> {
        self.gaps(instance, |s| self.m - s.lower)
    }

    fn gaps<F: Fn(&crate::Scenario) -> f64>(&self, instance: &DiscreteInstance, f: F) -> Vec<Member> {
        let sc = instance.scenarios();
        self.contact
            .iter()
            .map(|&i| Member { index: i, value: f(&sc[i]), weight: sc[i].weight })
            .collect()
    }
}

/// Splits the scenarios at `level` and records the shortfalls against the
/// required masses below and above.
pub(crate) fn partition_at(
    instance: &DiscreteInstance,
    level: f64,
    need_below: f64,
    need_above: f64,
) -> MedianPartition {
    let (mut a_minus, mut a_plus, mut contact) = (Vec::new(), Vec::new(), Vec::new());
    let (mut p_minus, mut p_plus, mut p0) = (0.0, 0.0, 0.0);
    for (i, s) in instance.scenarios().iter().enumerate() {
        if s.upper < level {
            a_minus.push(i);
            p_minus += s.weight;
        } else if s.lower > level {
            a_plus.push(i);
            p_plus += s.weight;
        } else {
            contact.push(i);
            p0 += s.weight;
        }
    }
    let alpha_minus = (need_below - p_minus).max(0.0);
    let alpha_plus = (need_above - p_plus).max(0.0);
    let feasible = p_minus + need_above <= 1.0 + MASS_TOL && p_plus + need_below <= 1.0 + MASS_TOL;
    MedianPartition {
        m: level,
        a_minus,
        a_plus,
        contact,
        p_minus,
        p_plus,
        p0,
        alpha_minus,
        alpha_plus,
        feasible,
    }
}

pub fn partition(instance: &DiscreteInstance, m: f64) -> MedianPartition {
    partition_at(instance, m, 0.5, 0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianBounds {
    pub interval: ClosedInterval,
    pub partition: MedianPartition,
    /// The contact set is empty, so the restriction does not tighten the
    /// Aumann interval.
    pub degenerate: bool,
}

/// Endpoints for a partition whose shortfalls the contact set can cover.
pub(crate) fn bounds_for_partition(instance: &DiscreteInstance, part: MedianPartition) -> Result<MedianBounds> {
    let aumann = aumann_interval(instance);
    if part.contact.is_empty() {
        return Ok(MedianBounds { interval: aumann, partition: part, degenerate: true });
    }
    let upper_cond = ConditionalLaw::new(part.upper_gaps(instance))?;
    let lower_cond = ConditionalLaw::new(part.lower_gaps(instance))?;
    let beta_max = (part.alpha_minus / part.p0).min(1.0);
    let beta_min = (part.alpha_plus / part.p0).min(1.0);
    let hi = aumann.hi - conditional_quantile_integral(&upper_cond, beta_max)?;
    let lo = aumann.lo + conditional_quantile_integral(&lower_cond, beta_min)?;
    let interval = ClosedInterval::new(lo.min(hi), hi).clip_to(&aumann);
    Ok(MedianBounds { interval, partition: part, degenerate: false })
}

/// `[E_min(m), E_max(m)]` with the partition it was computed from.
pub fn median_bounds(instance: &DiscreteInstance, m: f64) -> Result<MedianBounds> {
    let part = partition(instance, m);
    if !part.feasible {
        return Err(Error::InfeasibleMedian { m, p_minus: part.p_minus, p_plus: part.p_plus });
    }
    bounds_for_partition(instance, part)
}

/// The range of `E y` over selections that have `m` as a median.
pub fn median_restricted_mean_interval(instance: &DiscreteInstance, m: f64) -> Result<ClosedInterval> {
    median_bounds(instance, m).map(|b| b.interval)
}

/// The selection attaining one end of a partition's restricted mean interval:
/// the least-gap part of the contact set of the required mass moves to the
/// level, everything else stays at the relevant endpoint.
pub(crate) fn extremal_for_partition(
    instance: &DiscreteInstance,
    part: &MedianPartition,
    side: Extremum,
) -> Result<Selection> {
    let (endpoint, gaps, need) = match side {
        Extremum::Max => (Side::Upper, part.upper_gaps(instance), part.alpha_minus),
        Extremum::Min => (Side::Lower, part.lower_gaps(instance), part.alpha_plus),
    };
    let moved = if gaps.is_empty() || need <= 0.0 {
        None
    } else {
        let cond = ConditionalLaw::new(gaps)?;
        Some(least_x_set(&cond, need.min(cond.p0()))?)
    };
    let mut taken_at = vec![0.0; instance.len()];
    if let Some(set) = &moved {
        for &(i, w) in &set.parts {
            taken_at[i] += w;
        }
    }
    let choices = instance
        .scenarios()
        .iter()
        .zip(taken_at)
        .map(|(s, taken)| {
            let v = s.endpoint(endpoint);
            if taken <= 0.0 {
                vec![Choice::new(v, s.weight)]
            } else if taken >= s.weight || v == part.m {
                vec![Choice::new(part.m, s.weight)]
            } else {
                vec![Choice::new(part.m, taken), Choice::new(v, s.weight - taken)]
            }
        })
        .collect();
    Ok(Selection::from_choices(choices))
}

/// The selection attaining `E_max(m)` (`side = Max`) or `E_min(m)`.
pub fn extremal_selection(instance: &DiscreteInstance, m: f64, side: Extremum) -> Result<Selection> {
    let part = partition(instance, m);
    if !part.feasible {
        return Err(Error::InfeasibleMedian { m, p_minus: part.p_minus, p_plus: part.p_plus });
    }
    extremal_for_partition(instance, &part, side)
}

/// `theta * y_max + (1 - theta) * y_min`, pointwise; `m` stays a median.
pub fn mixed_selection(instance: &DiscreteInstance, m: f64, theta: f64) -> Result<Selection> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    let hi = extremal_selection(instance, m, Extremum::Max)?;
    let lo = extremal_selection(instance, m, Extremum::Min)?;
    Selection::pointwise_mix(&hi, &lo, theta)
}

/// A selection with median `m` and mean `kappa`, mixing the two extremal ones.
pub fn median_mean_selection(instance: &DiscreteInstance, m: f64, kappa: f64) -> Result<Selection> {
    let bounds = median_bounds(instance, m)?;
    let iv = bounds.interval;
    let tol = 1e-12 * instance.scale();
    if !iv.contains_within(kappa, tol) {
        return Err(Error::KappaInfeasible { kappa, lo: iv.lo, hi: iv.hi });
    }
    let theta = if iv.width() > 0.0 { ((kappa - iv.lo) / iv.width()).clamp(0.0, 1.0) } else { 1.0 };
    mixed_selection(instance, m, theta)
}

/// The values `F_y^{-1}(1/2)` taken by selections with mean `kappa`.
///
/// A candidate `m` qualifies when it is an attainable median and `kappa` lies
/// in its restricted mean interval. The qualifying set is scanned on the
/// breakpoints of the instance and its ends refined by bisection.
pub fn mean_restricted_median_range(instance: &DiscreteInstance, kappa: f64) -> Result<ClosedInterval> {
    let aumann = aumann_interval(instance);
    let tol = 1e-12 * instance.scale();
    if !aumann.contains_within(kappa, tol) {
        return Err(Error::KappaInfeasible { kappa, lo: aumann.lo, hi: aumann.hi });
    }
    let span = quantile_attainability_range(instance, 0.5)?;
    let qualifies = |m: f64| -> bool {
        if !span.contains(m) {
            return false;
        }
        let part = partition_at(instance, m, 0.5, 0.5);
        match bounds_for_partition(instance, part) {
            Ok(b) => b.interval.contains_within(kappa, tol),
            Err(_) => false,
        }
    };
    let mut grid: Vec<f64> = vec![span.lo, span.hi];
    for s in instance.scenarios() {
        for v in [s.lower, s.upper] {
            if span.contains(v) {
                grid.push(v);
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut fine = Vec::with_capacity(2 * grid.len());
    for w in grid.windows(2) {
        fine.push(w[0]);
        fine.push(0.5 * (w[0] + w[1]));
    }
    fine.push(*grid.last().unwrap());
    let flags: Vec<bool> = fine.iter().map(|&m| qualifies(m)).collect();
    let first = flags.iter().position(|&f| f).ok_or(Error::NoFeasibleSelection)?;
    let last = flags.iter().rposition(|&f| f).unwrap();
    let refine = |mut good: f64, mut bad: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (good + bad);
            if mid == good || mid == bad {
                break;
            }
            if qualifies(mid) { good = mid } else { bad = mid }
        }
        good
    };
    let lo = if first == 0 { fine[0] } else { refine(fine[first], fine[first - 1]) };
    let hi = if last + 1 == fine.len() { fine[last] } else { refine(fine[last], fine[last + 1]) };
    Ok(ClosedInterval::new(lo, hi))
}

/// The cost terms `S_L`, `S_U` and the interval they imply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalCostTerms {
    pub s_l: f64,
    pub s_u: f64,
    pub median_lower: f64,
    pub median_upper: f64,
    /// `[E y_L + S_L, E y_U - S_U]`.
    pub implied: ClosedInterval,
}

/// `integral_a^b g(F(t)) dt` for a right-continuous step CDF, summed exactly.
fn step_integral<G: Fn(f64) -> f64>(dist: &StepDistribution, a: f64, b: f64, g: G) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut t = a;
    let mut cdf = dist.cdf(a);
    for (v, mass) in dist.atoms() {
        if v <= a {
            continue;
        }
        if v >= b {
            break;
        }
        acc += g(cdf) * (v - t);
        t = v;
        cdf += mass;
    }
    acc + g(cdf) * (b - t)
}

/// `S_L = int_{m_L}^m (F_L - 1/2)` and `S_U = int_m^{m_U} (1/2 - F_U)` on the
/// marginal step laws of an instance.
pub fn marginal_cost_terms(instance: &DiscreteInstance, m: f64) -> Result<MarginalCostTerms> {
    let fl = instance.marginal_law(Side::Lower);
    let fu = instance.marginal_law(Side::Upper);
    let (ml, mu) = (fl.quantile(0.5)?, fu.quantile(0.5)?);
    if !(ml <= m && m <= mu) {
        return Err(Error::MOutsideMedianSpan { m, lo: ml, hi: mu });
    }
    let s_l = step_integral(&fl, ml, m, |f| f - 0.5);
    let s_u = step_integral(&fu, m, mu, |f| 0.5 - f);
    let aumann = aumann_interval(instance);
    Ok(MarginalCostTerms {
        s_l,
        s_u,
        median_lower: ml,
        median_upper: mu,
        implied: ClosedInterval::new(aumann.lo + s_l, (aumann.hi - s_u).max(aumann.lo + s_l)),
    })
}

/// Quadrature tolerance for the parametric cost terms.
pub const COST_QUADRATURE_TOL: f64 = 1e-8;

/// [`marginal_cost_terms`] for continuous comonotone marginals.
pub fn marginal_cost_terms_parametric(
    lower: &ParametricLaw,
    upper: &ParametricLaw,
    m: f64,
) -> Result<MarginalCostTerms> {
    lower.validate()?;
    upper.validate()?;
    let (ml, mu) = (lower.median(), upper.median());
    if !(ml <= m && m <= mu) {
        return Err(Error::MOutsideMedianSpan { m, lo: ml, hi: mu });
    }
    let s_l = adaptive_simpson(&|t| lower.cdf(t) - 0.5, ml, m, COST_QUADRATURE_TOL);
    let s_u = adaptive_simpson(&|t| 0.5 - upper.cdf(t), m, mu, COST_QUADRATURE_TOL);
    let (el, eu) = (lower.mean(), upper.mean());
    Ok(MarginalCostTerms {
        s_l,
        s_u,
        median_lower: ml,
        median_upper: mu,
        implied: ClosedInterval::new(el + s_l, (eu - s_u).max(el + s_l)),
    })
}

//! Mean bounds under `E[y^r] = mu_r`, through the Lagrangian dual
//!
//! `sup E y = inf_lambda E sup_{x in Y} (x + lambda x^r) - lambda mu_r`
//!
//! and the mirrored `inf`/`sup` for the lower end.

use alloc::vec::Vec;

use crate::benchmark::aumann_interval;
use crate::model::{ClosedInterval, DiscreteInstance};
use crate::numeric::golden_min;
use crate::{Error, Result};

/// Largest multiplier magnitude the outer search will reach.
pub const LAMBDA_CAP: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRestriction {
    pub r: f64,
    pub mu_r: f64,
}

fn is_odd_integer(r: f64) -> bool {
    r.is_finite() && r == libm::round(r) && libm::fmod(libm::fabs(r), 2.0) == 1.0
}

/// Odd integer `r >= 1`, or `r > 0` on an instance with nonnegative lowers.
pub fn check_power(instance: &DiscreteInstance, r: f64) -> Result<()> {
    let odd = is_odd_integer(r) && r >= 1.0;
    let nonneg = r > 0.0 && r.is_finite() && instance.scenarios().iter().all(|s| s.lower >= 0.0);
    if odd || nonneg { Ok(()) } else { Err(Error::InvalidPower(r)) }
}

pub(crate) fn power(x: f64, r: f64) -> f64 {
    if r == 1.0 { x } else { libm::pow(x, r) }
}

/// `[E y_L^r, E y_U^r]`.
pub fn power_image_interval(instance: &DiscreteInstance, r: f64) -> Result<ClosedInterval> {
    check_power(instance, r)?;
    let lo = instance.scenarios().iter().map(|s| s.weight * power(s.lower, r)).sum::<f64>();
    let hi = instance.scenarios().iter().map(|s| s.weight * power(s.upper, r)).sum::<f64>();
    Ok(ClosedInterval::new(lo.min(hi), hi))
}

/// Points of `[lower, upper]` where `x + lambda x^r` can be extremal.
pub fn inner_candidates(lower: f64, upper: f64, lambda: f64, r: f64) -> Vec<f64> {
    let mut c = alloc::vec![lower, upper];
    if r != 1.0 && lambda != 0.0 {
        let base = -1.0 / (lambda * r);
        if base > 0.0 {
            let root = libm::pow(base, 1.0 / (r - 1.0));
            if root.is_finite() {
                for x in [root, -root] {
                    if lower < x && x < upper {
                        c.push(x);
                    }
                }
            }
        }
    }
    c
}

/// `sup_{x in [lower, upper]} x + lambda x^r`.
pub fn inner_sup(lower: f64, upper: f64, lambda: f64, r: f64) -> f64 {
    inner_candidates(lower, upper, lambda, r)
        .into_iter()
        .map(|x| x + lambda * power(x, r))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `inf_{x in [lower, upper]} x + lambda x^r`.
pub fn inner_inf(lower: f64, upper: f64, lambda: f64, r: f64) -> f64 {
    inner_candidates(lower, upper, lambda, r)
        .into_iter()
        .map(|x| x + lambda * power(x, r))
        .fold(f64::INFINITY, f64::min)
}

/// `E Psi_r(lambda) - lambda mu_r`, convex in `lambda`.
pub fn upper_dual(instance: &DiscreteInstance, restriction: &MomentRestriction, lambda: f64) -> f64 {
    let e: f64 = instance.scenarios().iter().map(|s| s.weight * inner_sup(s.lower, s.upper, lambda, restriction.r)).sum();
    e - lambda * restriction.mu_r
}

/// `E Phi_r(lambda) - lambda mu_r`, concave in `lambda`.
pub fn lower_dual(instance: &DiscreteInstance, restriction: &MomentRestriction, lambda: f64) -> f64 {
    let e: f64 = instance.scenarios().iter().map(|s| s.weight * inner_inf(s.lower, s.upper, lambda, restriction.r)).sum();
    e - lambda * restriction.mu_r
}

/// Minimizes a convex function of `lambda`: the bracket `[-1, 1]` doubles on
/// each side while the function keeps decreasing outward, then golden section.
pub(crate) fn minimize_convex<F: Fn(f64) -> f64>(f: &F) -> (f64, f64) {
    let mut hi = 1.0;
    while hi < LAMBDA_CAP && f(2.0 * hi) < f(hi) {
        hi *= 2.0;
    }
    let mut lo = -1.0;
    while lo > -LAMBDA_CAP && f(2.0 * lo) < f(lo) {
        lo *= 2.0;
    }
    golden_min(f, 2.0 * lo, 2.0 * hi, 400)
}

/// `[inf, sup]` of `E y` over selections with `E y^r = mu_r`.
pub fn moment_restricted_mean_interval(instance: &DiscreteInstance, restriction: &MomentRestriction) -> Result<ClosedInterval> {
    let image = power_image_interval(instance, restriction.r)?;
    let mu = restriction.mu_r;
    let tol = 1e-12 * libm::fabs(image.hi).max(libm::fabs(image.lo)).max(1.0);
    if !image.contains_within(mu, tol) {
        return Err(Error::InfeasibleMoment { mu, lo: image.lo, hi: image.hi });
    }
    if restriction.r == 1.0 {
        return Ok(ClosedInterval::point(mu));
    }
    let (_, hi) = minimize_convex(&|l| upper_dual(instance, restriction, l));
    let (_, neg_lo) = minimize_convex(&|l| -lower_dual(instance, restriction, l));
    let aumann = aumann_interval(instance);
    let (lo, hi) = (-neg_lo, hi);
    Ok(ClosedInterval::new(lo.min(hi), hi).clip_to(&aumann))
}

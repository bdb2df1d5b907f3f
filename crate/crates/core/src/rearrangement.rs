//! Bathtub minimization of `E[X 1_S]` over sets of fixed mass, partial
//! quantile integrals, and the quantile-area identity.

use alloc::vec::Vec;

use crate::model::StepDistribution;
use crate::{Error, Result};

/// Slack allowed when a requested mass exceeds the available mass.
const MASS_SLACK: f64 = 1e-12;

/// A scenario inside the conditioning set, with its unconditional weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub index: usize,
    pub value: f64,
    pub weight: f64,
}

/// A nonnegative variable `X` restricted to a set `M` of mass `p0 > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalLaw {
    /// Sorted by `(value, index)`.
    members: Vec<Member>,
    p0: f64,
}

impl ConditionalLaw {
    pub fn new(mut members: Vec<Member>) -> Result<Self> {
        members.retain(|m| m.weight > 0.0);
        if members.is_empty() {
            return Err(Error::EmptyConditionalLaw);
        }
        for m in &members {
            if !m.value.is_finite() || !m.weight.is_finite() {
                return Err(Error::NonFinite { index: m.index });
            }
            if m.value < 0.0 {
                return Err(Error::NegativeSupport(m.value));
            }
        }
        members.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.index.cmp(&b.index)));
        let p0 = members.iter().map(|m| m.weight).sum();
        Ok(ConditionalLaw { members, p0 })
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// `E[X 1_M]`.
    pub fn restricted_total(&self) -> f64 {
        self.members.iter().map(|m| m.value * m.weight).sum()
    }

    /// Law of `X` given `M`.
    pub fn conditional(&self) -> StepDistribution {
        StepDistribution::from_weighted(self.members.iter().map(|m| (m.value, m.weight / self.p0)))
            .expect("members have positive weight")
    }
}

/// A least-`X` set: the member indices and the weight taken from each.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastXSet {
    pub parts: Vec<(usize, f64)>,
    pub value: f64,
}

impl LeastXSet {
    /// Weight taken from scenario `index` (zero if absent).
    pub fn taken(&self, index: usize) -> f64 {
        self.parts.iter().filter(|p| p.0 == index).map(|p| p.1).sum()
    }
}

/// Minimizes `E[X 1_S]` over `S` inside `M` with `P(S) = s`.
///
/// Members are filled in ascending `X` (ties by index); the boundary member is
/// split fractionally.
pub fn least_x_set(cond: &ConditionalLaw, s: f64) -> Result<LeastXSet> {
    if !(s >= 0.0 && s <= cond.p0 + MASS_SLACK) {
        return Err(Error::MassOutOfRange { mass: s, available: cond.p0 });
    }
    let mut remaining = s.min(cond.p0);
    let mut parts = Vec::new();
    let mut value = 0.0;
    for m in &cond.members {
        if remaining <= 0.0 {
            break;
        }
        let take = if m.weight <= remaining { m.weight } else { remaining };
        parts.push((m.index, take));
        value += m.value * take;
        remaining -= take;
    }
    Ok(LeastXSet { parts, value })
}

/// `p0 * integral_0^beta Q_{X|M}(u) du`.
pub fn conditional_quantile_integral(cond: &ConditionalLaw, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::BetaOutOfRange(beta));
    }
    Ok(cond.p0 * cond.conditional().partial_quantile_integral(beta))
}

/// Both sides of `integral_0^alpha Q = integral_0^inf (alpha - F(t))_+ dt`.
pub fn quantile_area(dist: &StepDistribution, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if dist.min() < 0.0 {
        return Err(Error::NegativeSupport(dist.min()));
    }
    let left = dist.partial_quantile_integral(alpha);
    let mut right = 0.0;
    let mut t = 0.0;
    let mut cdf = 0.0;
    for (v, m) in dist.atoms() {
        if cdf >= alpha {
            break;
        }
        right += (alpha - cdf) * (v - t);
        t = v;
        cdf += m;
    }
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> ConditionalLaw {
        ConditionalLaw::new(vec![
            Member { index: 0, value: 1.0, weight: 0.2 },
            Member { index: 1, value: 2.0, weight: 0.2 },
            Member { index: 2, value: 3.0, weight: 0.2 },
        ])
        .unwrap()
    }

    #[test]
    fn least_x_examples() {
        let c = three();
        let s = least_x_set(&c, 0.2).unwrap();
        assert!((s.value - 0.2).abs() < 1e-15);
        assert_eq!(s.parts, vec![(0, 0.2)]);
        assert_eq!(least_x_set(&c, 0.0).unwrap().value, 0.0);
        assert!((least_x_set(&c, c.p0()).unwrap().value - c.restricted_total()).abs() < 1e-15);
        let half = least_x_set(&c, 0.3).unwrap();
        assert_eq!(half.parts.len(), 2);
        assert!((half.taken(1) - 0.1).abs() < 1e-15);
        assert!(matches!(least_x_set(&c, 0.7), Err(Error::MassOutOfRange { .. })));
    }

    #[test]
    fn quantile_integral_examples() {
        let c = three();
        assert!((conditional_quantile_integral(&c, 1.0 / 3.0).unwrap() - 0.2).abs() < 1e-15);
        assert!((conditional_quantile_integral(&c, 1.0).unwrap() - c.restricted_total()).abs() < 1e-15);
        let flat = ConditionalLaw::new(vec![Member { index: 4, value: 2.5, weight: 0.4 }]).unwrap();
        assert!((conditional_quantile_integral(&flat, 0.3).unwrap() - 0.4 * 2.5 * 0.3).abs() < 1e-15);
        assert_eq!(conditional_quantile_integral(&c, 1.5), Err(Error::BetaOutOfRange(1.5)));
    }

    #[test]
    fn quantile_area_examples() {
        let p = StepDistribution::point_mass(0.0);
        assert_eq!(quantile_area(&p, 0.4).unwrap(), (0.0, 0.0));
        let d = StepDistribution::from_weighted([(1.0, 0.5), (3.0, 0.5)]).unwrap();
        let (l, r) = quantile_area(&d, 0.75).unwrap();
        assert!((l - 1.25).abs() < 1e-15 && (r - 1.25).abs() < 1e-15);
        let neg = StepDistribution::from_weighted([(-1.0, 1.0)]).unwrap();
        assert_eq!(quantile_area(&neg, 0.5), Err(Error::NegativeSupport(-1.0)));
    }

    #[test]
    fn conditional_law_rejects_bad_members() {
        assert_eq!(ConditionalLaw::new(vec![]), Err(Error::EmptyConditionalLaw));
        let neg = vec![Member { index: 0, value: -0.5, weight: 1.0 }];
        assert_eq!(ConditionalLaw::new(neg), Err(Error::NegativeSupport(-0.5)));
    }
}

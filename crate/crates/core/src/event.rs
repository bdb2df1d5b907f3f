//! Bounds on `P(y in A)` for a finite union of closed intervals `A`.
//!
//! Without restrictions the probability ranges over `[P(Y in A), P(Y meets A)]`.
//! Under a mean restriction `E y = kappa` the upper bound `U(kappa)` comes from
//! a threshold selection: a scenario moves into `A` when the mean it gives up
//! (its gap to `A`) is below the cutoff `1/|lambda|`, and the cutoff is
//! calibrated so the mean equals `kappa`. The lower bound `L(kappa)` applies the
//! same machinery to the closure of `Y \ A`. Both are cross-checked against the
//! Lagrangian dual envelopes.

use alloc::vec;
use alloc::vec::Vec;

use crate::benchmark::{aumann_interval, Choice, Selection};
use crate::model::{ClosedInterval, DiscreteInstance};
use crate::numeric::golden_min;
use crate::{Error, Result};

/// A finite union of disjoint closed intervals, sorted and maximal.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pieces: Vec<ClosedInterval>,
}

impl TargetSet {
    /// Sorts the pieces and merges overlapping or touching ones. Singletons
    /// `[a, a]` are allowed, and so is the empty set.
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        let mut raw = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::InvalidTarget("piece with a non-finite end"));
            }
            if a > b {
                return Err(Error::InvalidTarget("piece with lower end above upper end"));
            }
            raw.push(ClosedInterval::new(a, b));
        }
        raw.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        let mut pieces: Vec<ClosedInterval> = Vec::with_capacity(raw.len());
        for p in raw {
            match pieces.last_mut() {
                Some(last) if p.lo <= last.hi => last.hi = last.hi.max(p.hi),
                _ => pieces.push(p),
            }
        }
        Ok(TargetSet { pieces })
    }

    pub fn pieces(&self) -> &[ClosedInterval] {
        &self.pieces
    }

    pub fn contains(&self, x: f64) -> bool {
        self.piece_containing(x).is_some()
    }

    fn piece_containing(&self, x: f64) -> Option<ClosedInterval> {
        let k = self.pieces.partition_point(|p| p.hi < x);
        self.pieces.get(k).filter(|p| p.lo <= x).copied()
    }

    /// `(inf, sup)` of `[lo, hi] ∩ A`, or `None` if they do not meet.
    pub fn meet_extremes(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let mut first = None;
        let mut last = None;
        for p in &self.pieces {
            if p.hi < lo {
                continue;
            }
            if p.lo > hi {
                break;
            }
            if first.is_none() {
                first = Some(p.lo.max(lo));
            }
            last = Some(p.hi.min(hi));
        }
        first.zip(last)
    }

    /// `(inf, sup)` of the closure of `[lo, hi] \ A`, or `None` if `[lo, hi]`
    /// lies inside `A`.
    pub fn avoid_extremes(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let c_minus = match self.piece_containing(lo) {
            None => lo,
            Some(p) if p.hi >= hi => return None,
            Some(p) => p.hi,
        };
        let c_plus = match self.piece_containing(hi) {
            None => hi,
            Some(p) => p.lo,
        };
        Some((c_minus, c_plus))
    }
}

/// Position of one scenario relative to the target set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioGap {
    /// `Y ∩ A` is nonempty.
    pub hit: bool,
    /// `Y ⊆ A`.
    pub contain: bool,
    /// `inf(Y ∩ A)`, `+inf` if empty.
    pub a_minus: f64,
    /// `sup(Y ∩ A)`, `-inf` if empty.
    pub a_plus: f64,
    /// `a_minus - lower`, `+inf` on a miss.
    pub delta_minus: f64,
    /// `upper - a_plus`, `+inf` on a miss.
    pub delta_plus: f64,
    /// `inf` of the closure of `Y \ A`, `+inf` if contained.
    pub c_minus: f64,
    /// `sup` of the closure of `Y \ A`, `-inf` if contained.
    pub c_plus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    pub gaps: Vec<ScenarioGap>,
}

impl GapProfile {
    pub fn hit_mass(&self, instance: &DiscreteInstance) -> f64 {
        self.mass(instance, |g| g.hit)
    }

    pub fn contain_mass(&self, instance: &DiscreteInstance) -> f64 {
        self.mass(instance, |g| g.contain)
    }

    fn mass<F: Fn(&ScenarioGap) -> bool>(&self, instance: &DiscreteInstance, f: F) -> f64 {
        instance.scenarios().iter().zip(&self.gaps).filter(|(_, g)| f(g)).map(|(s, _)| s.weight).sum()
    }
}

pub fn gap_profile(instance: &DiscreteInstance, target: &TargetSet) -> GapProfile {
    let gaps = instance
        .scenarios()
        .iter()
        .map(|s| {
            let meet = target.meet_extremes(s.lower, s.upper);
            let avoid = target.avoid_extremes(s.lower, s.upper);
            let (a_minus, a_plus) = meet.unwrap_or((f64::INFINITY, f64::NEG_INFINITY));
            let (c_minus, c_plus) = avoid.unwrap_or((f64::INFINITY, f64::NEG_INFINITY));
            let (delta_minus, delta_plus) = match meet {
                Some((am, ap)) => ((am - s.lower).max(0.0), (s.upper - ap).max(0.0)),
                None => (f64::INFINITY, f64::INFINITY),
            };
            ScenarioGap {
                hit: meet.is_some(),
                contain: avoid.is_none(),
                a_minus,
                a_plus,
                delta_minus,
                delta_plus,
                c_minus,
                c_plus,
            }
        })
        .collect();
    GapProfile { gaps }
}

/// `[P(Y ⊆ A), P(Y ∩ A ≠ ∅)]`.
pub fn unrestricted_prob_bounds(instance: &DiscreteInstance, target: &TargetSet) -> ClosedInterval {
    let profile = gap_profile(instance, target);
    let lo = profile.contain_mass(instance);
    let hi = profile.hit_mass(instance);
    ClosedInterval::new(lo.min(hi), hi)
}

/// Probability that a selection lands in `A`.
pub fn selection_probability(selection: &Selection, target: &TargetSet) -> f64 {
    selection.mass_where(|v| target.contains(v))
}

/// The maximizer of `1{x in A} + lambda x` per scenario; ties keep the
/// endpoint. At `lambda = 0` every scenario that meets `A` takes `sup(Y ∩ A)`.
pub fn threshold_selection(instance: &DiscreteInstance, target: &TargetSet, lambda: f64) -> Selection {
    let profile = gap_profile(instance, target);
    let choices = instance
        .scenarios()
        .iter()
        .zip(&profile.gaps)
        .map(|(s, g)| {
            let v = if lambda > 0.0 {
                if g.hit && g.delta_plus * lambda < 1.0 { g.a_plus } else { s.upper }
            } else if lambda < 0.0 {
                if g.hit && g.delta_minus * -lambda < 1.0 { g.a_minus } else { s.lower }
            } else if g.hit {
                g.a_plus
            } else {
                s.upper
            };
            vec![Choice::new(v, s.weight)]
        })
        .collect();
    Selection::from_choices(choices)
}

/// How the calibrated multiplier was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `kappa = E y_L`; the only feasible selection is `y_L`.
    LowerExtreme,
    /// Negative multiplier: scenarios climb from `y_L` into the set.
    Negative,
    /// `lambda = 0`: every scenario meeting the set is inside it.
    Plateau,
    /// Positive multiplier: scenarios descend from `y_U` into the set.
    Positive,
    /// `kappa = E y_U`; the only feasible selection is `y_U`.
    UpperExtreme,
}

/// A mean-calibrated threshold selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// `lambda*`; `±inf` at the extremes of the Aumann interval.
    pub lambda: f64,
    /// The gap cutoff `1/|lambda*|` when a tie level binds.
    pub threshold: Option<f64>,
    /// Share of the tie level moved into the set (or mixing weight on the
    /// plateau).
    pub theta: f64,
    /// `U(kappa)`.
    pub probability: f64,
    pub selection: Selection,
    pub regime: Regime,
}

/// Per-scenario reachable range inside a closed set: `[lo_in, hi_in]`.
#[derive(Debug, Clone, Copy)]
struct Reach {
    hit: bool,
    lo_in: f64,
    hi_in: f64,
}

/// Mean tolerance when deciding that `kappa` sits at an Aumann endpoint.
fn kappa_tol(instance: &DiscreteInstance) -> f64 {
    1e-12 * instance.scale()
}

fn check_kappa(instance: &DiscreteInstance, kappa: f64) -> Result<ClosedInterval> {
    let aumann = aumann_interval(instance);
    if !aumann.contains_within(kappa, kappa_tol(instance)) {
        return Err(Error::KappaInfeasible { kappa, lo: aumann.lo, hi: aumann.hi });
    }
    Ok(aumann)
}

/// Distinct positive finite gap levels (ascending) with their mass and mean
/// cost `sum w * gap`.
fn gap_levels(instance: &DiscreteInstance, gap: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut items: Vec<(f64, f64)> = instance
        .scenarios()
        .iter()
        .zip(gap)
        .filter(|(_, &d)| d > 0.0 && d.is_finite())
        .map(|(s, &d)| (d, s.weight))
        .collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut levels: Vec<(f64, f64, f64)> = Vec::new();
    for (d, w) in items {
        match levels.last_mut() {
            Some(last) if last.0 == d => {
                last.1 += w;
                last.2 += w * d;
            }
            _ => levels.push((d, w, w * d)),
        }
    }
    levels
}

fn two_way(first: f64, w_first: f64, second: f64, w_second: f64) -> Vec<Choice> {
    if first == second || w_second <= 0.0 {
        vec![Choice::new(first, w_first + w_second)]
    } else if w_first <= 0.0 {
        vec![Choice::new(second, w_second)]
    } else {
        vec![Choice::new(first, w_first), Choice::new(second, w_second)]
    }
}

/// Maximizes `P(y in B)` subject to `E y = kappa`, where `B ∩ Y` spans
/// `[lo_in, hi_in]` in each scenario that meets it.
fn maximize(instance: &DiscreteInstance, reach: &[Reach], kappa: f64) -> Result<Calibration> {
    let aumann = check_kappa(instance, kappa)?;
    let kappa = kappa.clamp(aumann.lo, aumann.hi);
    let sc = instance.scenarios();
    let tol = kappa_tol(instance);
    let in_upper: f64 = sc.iter().zip(reach).filter(|(s, r)| r.hit && r.hi_in == s.upper).map(|(s, _)| s.weight).sum();
    let in_lower: f64 = sc.iter().zip(reach).filter(|(s, r)| r.hit && r.lo_in == s.lower).map(|(s, _)| s.weight).sum();
    if kappa >= aumann.hi - tol && aumann.hi > aumann.lo {
        let selection = Selection::endpoint(instance, crate::Side::Upper);
        return Ok(Calibration {
            lambda: f64::INFINITY,
            threshold: None,
            theta: 0.0,
            probability: in_upper,
            selection,
            regime: Regime::UpperExtreme,
        });
    }
    if kappa <= aumann.lo + tol && aumann.hi > aumann.lo {
        let selection = Selection::endpoint(instance, crate::Side::Lower);
        return Ok(Calibration {
            lambda: f64::NEG_INFINITY,
            threshold: None,
            theta: 0.0,
            probability: in_lower,
            selection,
            regime: Regime::LowerExtreme,
        });
    }
    let low_choice = |i: usize| if reach[i].hit { reach[i].lo_in } else { sc[i].lower };
    let high_choice = |i: usize| if reach[i].hit { reach[i].hi_in } else { sc[i].upper };
    let kappa_lo0: f64 = (0..sc.len()).map(|i| sc[i].weight * low_choice(i)).sum();
    let kappa_hi0: f64 = (0..sc.len()).map(|i| sc[i].weight * high_choice(i)).sum();
    let hit_mass: f64 = sc.iter().zip(reach).filter(|(_, r)| r.hit).map(|(s, _)| s.weight).sum();

    if kappa >= kappa_lo0 && kappa <= kappa_hi0 {
        let span = kappa_hi0 - kappa_lo0;
        let theta = if span > 0.0 { ((kappa - kappa_lo0) / span).clamp(0.0, 1.0) } else { 1.0 };
        let choices = (0..sc.len())
            .map(|i| two_way(low_choice(i), (1.0 - theta) * sc[i].weight, high_choice(i), theta * sc[i].weight))
            .collect();
        return Ok(Calibration {
            lambda: 0.0,
            threshold: None,
            theta,
            probability: hit_mass,
            selection: Selection::from_choices(choices),
            regime: Regime::Plateau,
        });
    }

    let positive = kappa > kappa_hi0;
    let gaps: Vec<f64> = sc
        .iter()
        .zip(reach)
        .map(|(s, r)| match (r.hit, positive) {
            (false, _) => f64::INFINITY,
            (true, true) => (s.upper - r.hi_in).max(0.0),
            (true, false) => (r.lo_in - s.lower).max(0.0),
        })
        .collect();
    let levels = gap_levels(instance, &gaps);
    let mut mean = if positive { aumann.hi } else { aumann.lo };
    let mut below = sc.iter().zip(&gaps).filter(|(_, &d)| d == 0.0).map(|(s, _)| s.weight).sum::<f64>();
    let mut tie = None;
    for &(t, mass, cost) in &levels {
        let moved = if positive { mean - cost } else { mean + cost };
        let overshoots = if positive { moved < kappa } else { moved > kappa };
        if overshoots {
            let theta = (if positive { mean - kappa } else { kappa - mean } / cost).clamp(0.0, 1.0);
            tie = Some((t, mass, theta));
            break;
        }
        mean = moved;
        below += mass;
    }
    // Numerically the walk can exhaust the levels only when kappa sits on the
    // plateau edge; treat that as the last level fully moved.
    let (t, mass, theta) = tie.unwrap_or_else(|| {
        let &(t, mass, _) = levels.last().expect("kappa off the plateau needs a positive gap");
        below -= mass;
        (t, mass, 1.0)
    });
    let choices = (0..sc.len())
        .map(|i| {
            let (endpoint, inside) = if positive { (sc[i].upper, reach[i].hi_in) } else { (sc[i].lower, reach[i].lo_in) };
            let w = sc[i].weight;
            if gaps[i] < t {
                vec![Choice::new(inside, w)]
            } else if gaps[i] == t {
                two_way(inside, theta * w, endpoint, (1.0 - theta) * w)
            } else {
                vec![Choice::new(endpoint, w)]
            }
        })
        .collect();
    Ok(Calibration {
        lambda: if positive { 1.0 / t } else { -1.0 / t },
        threshold: Some(t),
        theta,
        probability: below + theta * mass,
        selection: Selection::from_choices(choices),
        regime: if positive { Regime::Positive } else { Regime::Negative },
    })
}

fn hit_reach(profile: &GapProfile) -> Vec<Reach> {
    profile.gaps.iter().map(|g| Reach { hit: g.hit, lo_in: g.a_minus, hi_in: g.a_plus }).collect()
}

fn avoid_reach(profile: &GapProfile) -> Vec<Reach> {
    profile.gaps.iter().map(|g| Reach { hit: !g.contain, lo_in: g.c_minus, hi_in: g.c_plus }).collect()
}

/// Solves `E y_lambda = kappa` for the threshold selection, randomizing on
/// the tie level, and reports `U(kappa)`.
pub fn calibrate_mean(instance: &DiscreteInstance, target: &TargetSet, kappa: f64) -> Result<Calibration> {
    let profile = gap_profile(instance, target);
    maximize(instance, &hit_reach(&profile), kappa)
}

/// `[L(kappa), U(kappa)]`, the range of `P(y in A)` over selections with
/// `E y = kappa`.
///
/// `L` is one minus the largest probability of landing in the closure of
/// `Y \ A`, so it is an infimum. At the ends of the Aumann interval the only
/// feasible selection is an endpoint and both bounds are its probability.
pub fn mean_restricted_prob_bounds(instance: &DiscreteInstance, target: &TargetSet, kappa: f64) -> Result<ClosedInterval> {
    let profile = gap_profile(instance, target);
    let upper = maximize(instance, &hit_reach(&profile), kappa)?;
    let lower = match upper.regime {
        Regime::UpperExtreme | Regime::LowerExtreme => upper.probability,
        _ => 1.0 - maximize(instance, &avoid_reach(&profile), kappa)?.probability,
    };
    let lower = lower.clamp(0.0, 1.0);
    let upper = upper.probability.clamp(0.0, 1.0);
    Ok(ClosedInterval::new(lower.min(upper), upper))
}

/// Multipliers at which the dual envelopes are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualGrid {
    pub min_decade: i32,
    pub max_decade: i32,
    pub per_decade: u32,
    /// Add the breakpoints `±1/gap` of the piecewise-linear envelopes.
    pub include_kinks: bool,
    pub refine_iters: usize,
}

impl Default for DualGrid {
    fn default() -> Self {
        DualGrid { min_decade: -4, max_decade: 8, per_decade: 20, include_kinks: true, refine_iters: 100 }
    }
}

impl DualGrid {
    fn points(&self, profile: &GapProfile) -> Vec<f64> {
        let mut pts = vec![0.0];
        let steps = (self.max_decade - self.min_decade) as u32 * self.per_decade;
        for k in 0..=steps {
            let e = self.min_decade as f64 + k as f64 / self.per_decade as f64;
            let x = libm::pow(10.0, e);
            pts.push(x);
            pts.push(-x);
        }
        if self.include_kinks {
            let mut add = |d: f64, sign: f64| {
                if d > 0.0 && d.is_finite() {
                    pts.push(sign / d);
                }
            };
            for g in &profile.gaps {
                add(g.delta_plus, 1.0);
                add(g.delta_minus, -1.0);
                if g.hit && !g.contain {
                    add(g.c_minus - g.a_minus, 1.0);
                    add(g.a_plus - g.c_plus, -1.0);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// `E Psi(lambda) = E sup_{x in Y} (1{x in A} + lambda x)`.
pub fn expected_psi(instance: &DiscreteInstance, profile: &GapProfile, lambda: f64) -> f64 {
    instance
        .scenarios()
        .iter()
        .zip(&profile.gaps)
        .map(|(s, g)| {
            let (end, inside) = if lambda >= 0.0 { (s.upper, g.a_plus) } else { (s.lower, g.a_minus) };
            let base = lambda * end;
            s.weight * if g.hit { base.max(1.0 + lambda * inside) } else { base }
        })
        .sum()
}

/// `E Phi(lambda) = E inf_{x in Y} (1{x in A} + lambda x)`, with the infimum
/// over `Y \ A` taken on its closure.
pub fn expected_phi(instance: &DiscreteInstance, profile: &GapProfile, lambda: f64) -> f64 {
    instance
        .scenarios()
        .iter()
        .zip(&profile.gaps)
        .map(|(s, g)| {
            let (out, inside) = if lambda >= 0.0 { (g.c_minus, g.a_minus) } else { (g.c_plus, g.a_plus) };
            let mut v = f64::INFINITY;
            if !g.contain {
                v = v.min(lambda * out);
            }
            if g.hit {
                v = v.min(1.0 + lambda * inside);
            }
            s.weight * v
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualEnvelope {
    /// `inf_lambda E Psi - lambda kappa`.
    pub upper: f64,
    pub lambda_upper: f64,
    /// `sup_lambda E Phi - lambda kappa`.
    pub lower: f64,
    pub lambda_lower: f64,
}

fn grid_then_golden<F: Fn(f64) -> f64>(f: &F, pts: &[f64], iters: usize) -> (f64, f64) {
    let mut best = 0;
    let mut best_v = f64::INFINITY;
    for (i, &x) in pts.iter().enumerate() {
        let v = f(x);
        if v < best_v {
            best_v = v;
            best = i;
        }
    }
    let a = pts[best.saturating_sub(1)];
    let b = pts[(best + 1).min(pts.len() - 1)];
    let (x, v) = golden_min(f, a, b, iters);
    if v < best_v { (x, v) } else { (pts[best], best_v) }
}

/// Evaluates both dual envelopes on `grid` and refines around the best point.
pub fn dual_envelope(instance: &DiscreteInstance, target: &TargetSet, kappa: f64, grid: &DualGrid) -> Result<DualEnvelope> {
    check_kappa(instance, kappa)?;
    let profile = gap_profile(instance, target);
    let pts = grid.points(&profile);
    let psi = |l: f64| expected_psi(instance, &profile, l) - l * kappa;
    let neg_phi = |l: f64| -(expected_phi(instance, &profile, l) - l * kappa);
    let (lambda_upper, upper) = grid_then_golden(&psi, &pts, grid.refine_iters);
    let (lambda_lower, lower) = grid_then_golden(&neg_phi, &pts, grid.refine_iters);
    Ok(DualEnvelope { upper, lambda_upper, lower: -lower, lambda_lower })
}

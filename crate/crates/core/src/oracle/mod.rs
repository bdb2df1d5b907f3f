//! Brute-force ground truth on small instances.
//!
//! The median, quantile and moment oracles optimize the mean over every law a
//! selection can have when each scenario's mass is spread over a finite
//! candidate grid; that is a linear program in the candidate masses, solved
//! here by a dense simplex. The event-probability oracle enumerates which
//! scenarios land inside the target and takes the concave (or convex) envelope
//! of the resulting (mean, probability) segments.

mod simplex;

use alloc::vec;
use alloc::vec::Vec;

use crate::benchmark::{Choice, Selection};
use crate::event::TargetSet;
use crate::extensions::moment::{check_power, power, power_image_interval};
use crate::model::{ClosedInterval, DiscreteInstance, Side, MASS_TOL};
use crate::{Error, Result};
use simplex::{Cmp, Lp, LpOutcome};

pub const MAX_MEDIAN_SCENARIOS: usize = 12;
pub const MAX_QUANTILE_SCENARIOS: usize = 12;
pub const MAX_PROB_SCENARIOS: usize = 8;
pub const MAX_MOMENT_SCENARIOS: usize = 6;

/// Endpoint movement below which mesh refinement stops.
pub const MESH_TOL: f64 = 1e-5;
/// Finest mesh the moment oracle will try per scenario.
pub const MAX_MESH: usize = 1 << 15;

/// Sorted, deduplicated candidate values per scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    pub values: Vec<Vec<f64>>,
}

impl CandidateGrid {
    /// Endpoints, every breakpoint inside the interval, and `mesh` evenly
    /// spaced points (endpoints included) when `mesh >= 2`.
    pub fn new(instance: &DiscreteInstance, breakpoints: &[f64], mesh: usize) -> Self {
        let values = instance
            .scenarios()
            .iter()
            .map(|s| {
                let mut c = vec![s.lower, s.upper];
                c.extend(breakpoints.iter().copied().filter(|&b| s.lower <= b && b <= s.upper));
                if mesh >= 2 {
                    let step = (s.upper - s.lower) / (mesh - 1) as f64;
                    c.extend((1..mesh - 1).map(|k| s.lower + step * k as f64));
                }
                c.sort_by(f64::total_cmp);
                c.dedup();
                c
            })
            .collect();
        CandidateGrid { values }
    }

    pub fn len(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Oracle bounds with the selections that attain them on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleBounds {
    pub interval: ClosedInterval,
    pub argmin: Selection,
    pub argmax: Selection,
}

fn check_size(instance: &DiscreteInstance, max: usize) -> Result<()> {
    if instance.len() > max {
        return Err(Error::InstanceTooLarge { len: instance.len(), max });
    }
    Ok(())
}

/// Columns are `(scenario, candidate)` pairs; one equality row per scenario
/// keeps each scenario's mass, `extra` rows come from the restriction.
struct MassLp<'a> {
    instance: &'a DiscreteInstance,
    grid: &'a CandidateGrid,
    columns: Vec<(usize, f64)>,
}

impl<'a> MassLp<'a> {
    fn new(instance: &'a DiscreteInstance, grid: &'a CandidateGrid) -> Self {
        let columns = grid.values.iter().enumerate().flat_map(|(i, cs)| cs.iter().map(move |&c| (i, c))).collect();
        MassLp { instance, grid, columns }
    }

    fn row<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.columns.iter().map(|&(_, c)| f(c)).collect()
    }

    fn solve(&self, extra: &[(Vec<f64>, Cmp, f64)], sign: f64) -> Result<(f64, Selection)> {
        let mut rows = Vec::with_capacity(self.instance.len() + extra.len());
        for (i, s) in self.instance.scenarios().iter().enumerate() {
            let coef = self.columns.iter().map(|&(k, _)| if k == i { 1.0 } else { 0.0 }).collect();
            rows.push((coef, Cmp::Eq, s.weight));
        }
        rows.extend(extra.iter().cloned());
        let lp = Lp { objective: self.row(|c| sign * c), rows };
        match lp.solve() {
            LpOutcome::Optimal { x, .. } => {
                let selection = self.selection(&x);
                Ok((selection.mean(), selection))
            }
            LpOutcome::Infeasible => Err(Error::NoFeasibleSelection),
            LpOutcome::Unbounded => unreachable!("masses are bounded"),
        }
    }

    /// Reads a selection off the LP masses, rescaled to the exact weights.
    fn selection(&self, x: &[f64]) -> Selection {
        let mut choices: Vec<Vec<Choice>> = vec![Vec::new(); self.instance.len()];
        for (&(i, c), &v) in self.columns.iter().zip(x) {
            if v > 1e-15 {
                choices[i].push(Choice::new(c, v));
            }
        }
        for (cs, s) in choices.iter_mut().zip(self.instance.scenarios()) {
            if cs.is_empty() {
                cs.push(Choice::new(s.lower, s.weight));
                continue;
            }
            let total: f64 = cs.iter().map(|c| c.weight).sum();
            for c in cs.iter_mut() {
                c.weight *= s.weight / total;
            }
        }
        let _ = self.grid;
        Selection::from_choices(choices)
    }

    fn bounds(&self, extra: &[(Vec<f64>, Cmp, f64)]) -> Result<OracleBounds> {
        let (hi, argmax) = self.solve(extra, 1.0)?;
        let (lo, argmin) = self.solve(extra, -1.0)?;
        Ok(OracleBounds { interval: ClosedInterval::new(lo.min(hi), hi.max(lo)), argmin, argmax })
    }
}

/// Mean range over selections with at least `need_below` mass at or below
/// `level` and `need_above` at or above it.
fn level_bounds(instance: &DiscreteInstance, level: f64, need_below: f64, need_above: f64) -> Result<OracleBounds> {
    let grid = CandidateGrid::new(instance, &[level], 0);
    let lp = MassLp::new(instance, &grid);
    let extra = [
        (lp.row(|c| if c <= level { 1.0 } else { 0.0 }), Cmp::Ge, need_below - MASS_TOL),
        (lp.row(|c| if c >= level { 1.0 } else { 0.0 }), Cmp::Ge, need_above - MASS_TOL),
    ];
    lp.bounds(&extra)
}

/// Mean range over selections that have `m` as a median.
pub fn exact_median_mean_bounds(instance: &DiscreteInstance, m: f64) -> Result<OracleBounds> {
    check_size(instance, MAX_MEDIAN_SCENARIOS)?;
    level_bounds(instance, m, 0.5, 0.5)
}

/// Closure of the mean range over selections with `F_y^{-1}(alpha) = q`.
pub fn exact_quantile_mean_bounds(instance: &DiscreteInstance, alpha: f64, q: f64) -> Result<OracleBounds> {
    check_size(instance, MAX_QUANTILE_SCENARIOS)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    // Some selection has alpha-quantile q iff P(y_L <= q) >= alpha > P(y_U < q).
    let at_or_below = instance.mass_where(|s| s.lower <= q);
    let strictly_below = instance.mass_where(|s| s.upper < q);
    if !(at_or_below >= alpha - MASS_TOL && strictly_below < alpha - MASS_TOL) {
        let lo = instance.marginal_law(Side::Lower).quantile(alpha)?;
        let hi = instance.marginal_law(Side::Upper).quantile(alpha)?;
        return Err(Error::InfeasibleQuantile { alpha, q, lo, hi });
    }
    level_bounds(instance, q, alpha, 1.0 - alpha)
}

/// Mean range over selections with `E y^r = mu_r`, on a candidate mesh that
/// doubles from `mesh` until the endpoints move less than [`MESH_TOL`].
pub fn exact_moment_mean_bounds(instance: &DiscreteInstance, r: f64, mu_r: f64, mesh: usize) -> Result<OracleBounds> {
    check_size(instance, MAX_MOMENT_SCENARIOS)?;
    check_power(instance, r)?;
    let image = power_image_interval(instance, r)?;
    let tol = 1e-12 * libm::fabs(image.lo).max(libm::fabs(image.hi)).max(1.0);
    if !image.contains_within(mu_r, tol) {
        return Err(Error::InfeasibleMoment { mu: mu_r, lo: image.lo, hi: image.hi });
    }
    let mu = mu_r.clamp(image.lo, image.hi);
    let solve = |mesh: usize| {
        let grid = CandidateGrid::new(instance, &[], mesh);
        let lp = MassLp::new(instance, &grid);
        let extra = [(lp.row(|c| power(c, r)), Cmp::Eq, mu)];
        lp.bounds(&extra)
    };
    let mut mesh = mesh.max(2);
    let mut current = solve(mesh)?;
    while mesh < MAX_MESH {
        mesh = 2 * mesh - 1;
        let next = solve(mesh)?;
        let moved = next.interval.max_abs_diff(&current.interval);
        current = next;
        if moved < MESH_TOL {
            break;
        }
    }
    Ok(current)
}

/// Reachable mean range of one scenario inside and outside the target.
#[derive(Debug, Clone, Copy)]
struct ClassRange {
    inside: Option<(f64, f64)>,
    outside: Option<(f64, f64)>,
}

fn extend(range: &mut Option<(f64, f64)>, v: f64) {
    *range = Some(match *range {
        None => (v, v),
        Some((lo, hi)) => (lo.min(v), hi.max(v)),
    });
}

fn class_ranges(instance: &DiscreteInstance, target: &TargetSet, mesh: usize) -> Vec<ClassRange> {
    let ends: Vec<f64> = target.pieces().iter().flat_map(|p| [p.lo, p.hi]).collect();
    let grid = CandidateGrid::new(instance, &ends, mesh);
    instance
        .scenarios()
        .iter()
        .zip(&grid.values)
        .map(|(s, cs)| {
            let mut inside = None;
            let mut outside = None;
            for &c in cs {
                if target.contains(c) {
                    extend(&mut inside, c);
                } else {
                    extend(&mut outside, c);
                }
            }
            // Piece ends with outside points next to them inside [lower, upper]
            // are limits of outside values.
            for p in target.pieces() {
                if s.lower < p.lo && p.lo <= s.upper {
                    extend(&mut outside, p.lo);
                }
                if s.lower <= p.hi && p.hi < s.upper {
                    extend(&mut outside, p.hi);
                }
            }
            ClassRange { inside, outside }
        })
        .collect()
}

/// Best `theta p_a + (1 - theta) p_b` with `theta x_a + (1 - theta) x_b = kappa`,
/// `x_a` in `ra`, `x_b` in `rb`, where `p_a >= p_b` (so `theta` is maximized).
fn pair_value(ra: (f64, f64), pa: f64, rb: (f64, f64), pb: f64, kappa: f64) -> Option<f64> {
    let theta = if ra.0 <= kappa && kappa <= ra.1 {
        1.0
    } else if kappa < ra.0 {
        if rb.0 > kappa {
            return None;
        }
        (kappa - rb.0) / (ra.0 - rb.0)
    } else {
        if rb.1 < kappa {
            return None;
        }
        (rb.1 - kappa) / (rb.1 - ra.1)
    };
    Some(theta * pa + (1.0 - theta) * pb)
}

/// `[min, max]` of `P(y in A)` over selections with `E y = kappa`, the
/// minimum taken as an infimum.
pub fn exact_prob_bounds(instance: &DiscreteInstance, target: &TargetSet, kappa: f64, mesh: usize) -> Result<ClosedInterval> {
    check_size(instance, MAX_PROB_SCENARIOS)?;
    let classes = class_ranges(instance, target, mesh);
    let sc = instance.scenarios();
    let mut points: Vec<((f64, f64), f64)> = Vec::new();
    'patterns: for mask in 0u32..(1u32 << sc.len()) {
        let (mut lo, mut hi, mut p) = (0.0, 0.0, 0.0);
        for (i, (s, c)) in sc.iter().zip(&classes).enumerate() {
            let inside = mask & (1 << i) != 0;
            let range = if inside { c.inside } else { c.outside };
            let Some((a, b)) = range else { continue 'patterns };
            lo += s.weight * a;
            hi += s.weight * b;
            if inside {
                p += s.weight;
            }
        }
        points.push(((lo, hi.max(lo)), p));
    }
    let tol = 1e-12 * instance.scale();
    let mut best_hi = f64::NEG_INFINITY;
    let mut best_lo = f64::INFINITY;
    for (i, &(ra, pa)) in points.iter().enumerate() {
        if ra.0 - tol <= kappa && kappa <= ra.1 + tol {
            best_hi = best_hi.max(pa);
            best_lo = best_lo.min(pa);
        }
        for &(rb, pb) in &points[i + 1..] {
            let (hi_pair, lo_pair) = if pa >= pb { ((ra, pa), (rb, pb)) } else { ((rb, pb), (ra, pa)) };
            if let Some(v) = pair_value(hi_pair.0, hi_pair.1, lo_pair.0, lo_pair.1, kappa) {
                best_hi = best_hi.max(v);
            }
            if let Some(v) = pair_value(lo_pair.0, lo_pair.1, hi_pair.0, hi_pair.1, kappa) {
                best_lo = best_lo.min(v);
            }
        }
    }
    if !best_hi.is_finite() {
        let lo = instance.endpoint_mean(Side::Lower);
        let hi = instance.endpoint_mean(Side::Upper);
        return Err(Error::KappaInfeasible { kappa, lo, hi });
    }
    Ok(ClosedInterval::new(best_lo.clamp(0.0, 1.0).min(best_hi), best_hi.clamp(0.0, 1.0)))
}

//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{grid_value, interior_points, random_instance, random_instance_in, random_target, rng};
use rand::Rng;
use selection_bounds::benchmark::{aumann_interval, median_benchmark, quantile_attainability_range, quantile_selection, selection_stats};
use selection_bounds::event::{calibrate_mean, dual_envelope, mean_restricted_prob_bounds, unrestricted_prob_bounds, DualGrid};
use selection_bounds::extensions::{moment_restricted_mean_interval, power_image_interval, quantile_restricted_mean_interval, MomentRestriction, QuantileRestriction};
use selection_bounds::median::{marginal_cost_terms, mean_restricted_median_range, median_mean_selection, median_restricted_mean_interval, partition};
use selection_bounds::oracle::{exact_median_mean_bounds, exact_moment_mean_bounds, exact_prob_bounds, exact_quantile_mean_bounds};
use selection_bounds::rearrangement::{least_x_set, quantile_area, ConditionalLaw, Member};
use selection_bounds::{ClosedInterval, ComonotoneSpec, DiscreteInstance, Error, ParametricLaw, Selection, StepDistribution, TargetSet};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg.into()) }
}

fn unit() -> DiscreteInstance {
    DiscreteInstance::from_triples(&[(0.0, 1.0, 1.0)]).unwrap()
}

fn two_state() -> DiscreteInstance {
    DiscreteInstance::from_triples(&[(-2.0, 0.0, 0.5), (0.0, 2.0, 0.5)]).unwrap()
}

struct ChiSquareRun {
    aumann: ClosedInterval,
    medians: ClosedInterval,
    m: f64,
    general: ClosedInterval,
    implied: ClosedInterval,
}

fn chi_square_run(grid: usize) -> ChiSquareRun {
    let spec = ComonotoneSpec::new(ParametricLaw::ChiSquare { df: 2.0 }, ParametricLaw::ChiSquare { df: 5.0 }, grid);
    let inst = spec.discretize().unwrap();
    let medians = median_benchmark(&inst);
    let m = 0.3 * medians.lo + 0.7 * medians.hi;
    ChiSquareRun {
        aumann: aumann_interval(&inst),
        medians,
        m,
        general: median_restricted_mean_interval(&inst, m).unwrap(),
        implied: marginal_cost_terms(&inst, m).unwrap().implied,
    }
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let run = chi_square_run(200_001);
    let elapsed = start.elapsed().as_secs_f64();
    ensure((run.medians.lo - 1.386).abs() <= 1e-3, format!("Med(y_L) = {}", run.medians.lo))?;
    ensure((run.medians.hi - 4.351).abs() <= 1e-3, format!("Med(y_U) = {}", run.medians.hi))?;
    ensure((run.m - 3.46).abs() <= 1e-2, format!("m = {}", run.m))?;
    let diff = run.general.max_abs_diff(&run.implied);
    ensure(diff <= 1e-3, format!("general {:?} vs cost terms {:?}", run.general, run.implied))?;
    ensure(elapsed < 10.0, format!("runtime {elapsed:.2}s"))?;
    Ok(format!(
        "medians [{:.4}, {:.4}], m = {:.4}, interval [{:.4}, {:.4}], cost-term gap {diff:.1e}, {elapsed:.2}s",
        run.medians.lo, run.medians.hi, run.m, run.general.lo, run.general.hi
    ))
}

fn criterion_2() -> Check {
    let inst = unit();
    let iv = median_restricted_mean_interval(&inst, 0.5).unwrap();
    ensure(iv == ClosedInterval::new(0.25, 0.75), format!("m = 0.5 gives {iv:?}"))?;
    let mut worst: f64 = 0.0;
    for k in 1..1000 {
        let m = k as f64 / 1000.0;
        let iv = median_restricted_mean_interval(&inst, m).unwrap();
        worst = worst.max(iv.max_abs_diff(&ClosedInterval::new(m / 2.0, (m + 1.0) / 2.0)));
    }
    ensure(worst <= 1e-12, format!("sweep error {worst:e}"))?;
    Ok(format!("[0.25, 0.75] exact, 999-point sweep error {worst:.1e}"))
}

fn criterion_3() -> Check {
    let inst = two_state();
    for k in 0..=20 {
        let m = -2.0 + 2.0 * k as f64 / 20.0;
        let built = median_mean_selection(&inst, m, 0.0).map_err(|e| format!("m = {m}: {e}"))?;
        let stats = selection_stats(&inst, &built).map_err(|e| e.to_string())?;
        ensure(stats.mean.abs() <= 1e-12 && stats.has_median(m), format!("m = {m}: mean {} median ok {}", stats.mean, stats.has_median(m)))?;
        // The explicit pair (m, -m) from the example.
        let pair = Selection::from_values(&inst, &[m, -m]).map_err(|e| e.to_string())?;
        let stats = selection_stats(&inst, &pair).map_err(|e| e.to_string())?;
        ensure(stats.mean.abs() <= 1e-15 && stats.has_median(m), format!("pair at m = {m}"))?;
    }
    let range = mean_restricted_median_range(&inst, 0.0).map_err(|e| e.to_string())?;
    ensure(range == ClosedInterval::new(-2.0, 0.0), format!("median range {range:?}"))?;
    Ok("21 selections with mean 0 and median m built; median range [-2, 0] exact".into())
}

/// Smallest `E[X 1_S]` over sets of mass `s` built from whole members plus a
/// fractional part of at most one more.
fn brute_force_least(members: &[Member], s: f64) -> f64 {
    let n = members.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let (mut mass, mut value) = (0.0, 0.0);
        for (i, m) in members.iter().enumerate() {
            if mask & (1 << i) != 0 {
                mass += m.weight;
                value += m.weight * m.value;
            }
        }
        if (mass - s).abs() <= 1e-15 {
            best = best.min(value);
        }
        if mass < s {
            for (i, m) in members.iter().enumerate() {
                if mask & (1 << i) == 0 && mass + m.weight >= s {
                    best = best.min(value + (s - mass) * m.value);
                }
            }
        }
    }
    best
}

fn criterion_4() -> Check {
    let mut rng = rng(4);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let n = rng.gen_range(1..=12);
        let members: Vec<Member> = (0..n)
            .map(|index| Member { index, value: rng.gen_range(0..=40) as f64 / 8.0, weight: rng.gen_range(1..=16) as f64 / 256.0 })
            .collect();
        let cond = ConditionalLaw::new(members.clone()).unwrap();
        let s = cond.p0() * rng.gen_range(0..=64) as f64 / 64.0;
        let fast = least_x_set(&cond, s).unwrap().value;
        let slow = brute_force_least(&members, s);
        let d = (fast - slow).abs();
        ensure(d <= 1e-12, format!("case {case}: bathtub {fast} vs brute force {slow}"))?;
        worst = worst.max(d);
    }
    let mut area: f64 = 0.0;
    for case in 0..500 {
        let n = rng.gen_range(1..=12);
        let law = StepDistribution::from_weighted((0..n).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.05..1.0)))).unwrap();
        let alpha = rng.gen_range(0.001..0.999);
        let (l, r) = quantile_area(&law, alpha).unwrap();
        ensure((l - r).abs() <= 1e-12, format!("case {case}: area {l} vs {r}"))?;
        area = area.max((l - r).abs());
    }
    Ok(format!("bathtub max error {worst:.1e}, quantile-area max error {area:.1e}"))
}

fn criterion_5() -> Check {
    let mut rng = rng(5);
    let (mut feasible, mut infeasible) = (0, 0);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let inst = random_instance(&mut rng, 6);
        for _ in 0..5 {
            let m = grid_value(&mut rng, -3, 3);
            let part = partition(&inst, m);
            let violated = part.p_minus > 0.5 + 1e-12 || part.p_plus > 0.5 + 1e-12;
            match (median_restricted_mean_interval(&inst, m), exact_median_mean_bounds(&inst, m)) {
                (Ok(a), Ok(b)) => {
                    let d = a.max_abs_diff(&b.interval);
                    ensure(d <= 1e-9 && !violated, format!("case {case} m {m}: {a:?} vs {:?}", b.interval))?;
                    worst = worst.max(d);
                    feasible += 1;
                }
                (Err(Error::InfeasibleMedian { .. }), Err(Error::NoFeasibleSelection)) if violated => infeasible += 1,
                other => return Err(format!("case {case} m {m}: {other:?}")),
            }
        }
    }
    Ok(format!("{feasible} feasible (max error {worst:.1e}), {infeasible} rejected by both"))
}

fn second_differences(v: &[f64]) -> impl Iterator<Item = f64> + '_ {
    v.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0])
}

fn criterion_6() -> Check {
    let mut rng = rng(6);
    let mut failures: Vec<String> = Vec::new();
    let (mut primal, mut dual): (f64, f64) = (0.0, 0.0);
    let mut monotone_breaks = 0;
    let mut first_break = None;
    for case in 0..100 {
        let n = rng.gen_range(1..=6);
        let inst = random_instance(&mut rng, n);
        let target = random_target(&mut rng);
        let aumann = aumann_interval(&inst);
        let outer = unrestricted_prob_bounds(&inst, &target);
        let mut kappas: Vec<f64> = (0..5).map(|_| rng.gen_range(aumann.lo..=aumann.hi)).collect();
        kappas.sort_by(f64::total_cmp);
        for &kappa in &kappas {
            let u = calibrate_mean(&inst, &target, kappa).unwrap().probability;
            let oracle = exact_prob_bounds(&inst, &target, kappa, 0).unwrap();
            primal = primal.max((u - oracle.hi).abs());
            let env = dual_envelope(&inst, &target, kappa, &DualGrid::default()).unwrap();
            dual = dual.max((env.upper - oracle.hi).abs()).max((env.lower - oracle.lo).abs());
        }
        // kappa grid including both ends of the Aumann interval.
        let grid: Vec<f64> = (0..=40).map(|k| aumann.lo + aumann.width() * k as f64 / 40.0).collect();
        let bounds: Vec<ClosedInterval> = grid.iter().map(|&k| mean_restricted_prob_bounds(&inst, &target, k).unwrap()).collect();
        let us: Vec<f64> = bounds.iter().map(|b| b.hi).collect();
        let ls: Vec<f64> = bounds.iter().map(|b| b.lo).collect();
        // Curvature on the interior, where the sets of feasible selections are not single points.
        if second_differences(&us[1..40]).any(|d| d > 1e-9) {
            failures.push(format!("case {case}: U not concave"));
        }
        if second_differences(&ls[1..40]).any(|d| d < -1e-9) {
            failures.push(format!("case {case}: L not convex"));
        }
        let u_up = us.windows(2).any(|w| w[1] > w[0] + 1e-9);
        let l_down = ls.windows(2).any(|w| w[1] < w[0] - 1e-9);
        if u_up || l_down {
            monotone_breaks += 1;
            first_break.get_or_insert(case);
        }
        for b in &bounds {
            if !(outer.lo - 1e-12 <= b.lo && b.lo <= b.hi + 1e-12 && b.hi <= outer.hi + 1e-12) {
                failures.push(format!("case {case}: sandwich broken {b:?} outside {outer:?}"));
            }
        }
        let at_lo = mean_restricted_prob_bounds(&inst, &target, aumann.lo).unwrap();
        let at_hi = mean_restricted_prob_bounds(&inst, &target, aumann.hi).unwrap();
        let p_lo = inst.mass_where(|s| target.contains(s.lower));
        let p_hi = inst.mass_where(|s| target.contains(s.upper));
        if at_lo.max_abs_diff(&ClosedInterval::point(p_lo)) > 1e-12 || at_hi.max_abs_diff(&ClosedInterval::point(p_hi)) > 1e-12 {
            failures.push(format!("case {case}: extremes {at_lo:?} / {at_hi:?} vs {p_lo} / {p_hi}"));
        }
    }
    if primal > 1e-6 {
        failures.push(format!("primal vs oracle error {primal:e}"));
    }
    if dual > 1e-4 {
        failures.push(format!("dual vs oracle error {dual:e}"));
    }
    if monotone_breaks > 0 {
        failures.push(format!(
            "U nonincreasing / L nondecreasing fails on {monotone_breaks} of 100 instances (first: case {})",
            first_break.unwrap()
        ));
    }
    let summary = format!("primal error {primal:.1e}, dual error {dual:.1e}");
    if failures.is_empty() { Ok(summary) } else { Err(format!("{summary}; {}", failures.join("; "))) }
}

fn criterion_7() -> Check {
    let target = TargetSet::new(&[(0.8, 1.0)]).unwrap();
    let cal = calibrate_mean(&unit(), &target, 0.5).unwrap();
    ensure((cal.probability - 0.625).abs() <= 1e-9, format!("U(0.5) = {}", cal.probability))?;
    ensure((cal.lambda + 1.25).abs() <= 1e-6, format!("lambda = {}", cal.lambda))?;
    ensure((cal.theta - 0.625).abs() <= 1e-9, format!("theta = {}", cal.theta))?;
    Ok(format!("U = {}, lambda = {}, theta = {}", cal.probability, cal.lambda, cal.theta))
}

fn criterion_8() -> Check {
    let iv = moment_restricted_mean_interval(&unit(), &MomentRestriction { r: 2.0, mu_r: 0.25 }).map_err(|e| e.to_string())?;
    ensure(iv.max_abs_diff(&ClosedInterval::new(0.25, 0.5)) <= 1e-4, format!("r = 2 gives {iv:?}"))?;
    let mut rng = rng(8);
    for _ in 0..20 {
        let inst = random_instance(&mut rng, 4);
        let aumann = aumann_interval(&inst);
        let kappa = rng.gen_range(aumann.lo..=aumann.hi);
        let iv = moment_restricted_mean_interval(&inst, &MomentRestriction { r: 1.0, mu_r: kappa }).map_err(|e| e.to_string())?;
        ensure(iv == ClosedInterval::point(kappa), format!("r = 1 gives {iv:?} for {kappa}"))?;
    }
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = rng.gen_range(1..=4);
        let (inst, r) = if case % 2 == 0 {
            (random_instance_in(&mut rng, n, 0, 2), [0.5, 2.0, 3.0][rng.gen_range(0..3)])
        } else {
            (random_instance_in(&mut rng, n, -2, 2), 3.0)
        };
        let image = power_image_interval(&inst, r).unwrap();
        let mu_r = rng.gen_range(image.lo..=image.hi);
        let dual = moment_restricted_mean_interval(&inst, &MomentRestriction { r, mu_r }).map_err(|e| e.to_string())?;
        let oracle = exact_moment_mean_bounds(&inst, r, mu_r, 33).map_err(|e| e.to_string())?;
        let d = dual.max_abs_diff(&oracle.interval);
        ensure(d <= 1e-4, format!("case {case} r {r}: {dual:?} vs {:?}", oracle.interval))?;
        worst = worst.max(d);
    }
    Ok(format!("[{:.6}, {:.6}] on the unit interval, r = 1 exact, dual vs oracle {worst:.1e}", iv.lo, iv.hi))
}

fn criterion_9() -> Check {
    let mut rng = rng(9);
    let mut coincide = 0;
    while coincide < 100 {
        let n = rng.gen_range(1..=10);
        let inst = random_instance(&mut rng, n);
        let span = quantile_attainability_range(&inst, 0.5).unwrap();
        let m = interior_points(span.lo, span.hi, 3)[rng.gen_range(0..3)];
        if let (Ok(q), Ok(med)) = (quantile_restricted_mean_interval(&inst, &QuantileRestriction { alpha: 0.5, q: m }), median_restricted_mean_interval(&inst, m)) {
            ensure(q == med, format!("alpha = 1/2: {q:?} vs {med:?}"))?;
            coincide += 1;
        }
    }
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for case in 0..100 {
        let inst = random_instance(&mut rng, 6);
        let alpha = rng.gen_range(1..20) as f64 / 20.0;
        let span = quantile_attainability_range(&inst, alpha).unwrap();
        for q in [span.lo, span.hi, grid_value(&mut rng, -3, 3)] {
            match (quantile_restricted_mean_interval(&inst, &QuantileRestriction { alpha, q }), exact_quantile_mean_bounds(&inst, alpha, q)) {
                (Ok(a), Ok(b)) => {
                    let d = a.max_abs_diff(&b.interval);
                    ensure(d <= 1e-9, format!("case {case} alpha {alpha} q {q}: {a:?} vs {:?}", b.interval))?;
                    worst = worst.max(d);
                    compared += 1;
                }
                (Err(Error::InfeasibleQuantile { .. }), Err(Error::InfeasibleQuantile { .. })) => {}
                other => return Err(format!("case {case} alpha {alpha} q {q}: {other:?}")),
            }
        }
    }
    for case in 0..100 {
        let n = rng.gen_range(1..=10);
        let inst = random_instance(&mut rng, n);
        let alpha = rng.gen_range(0.01..0.99);
        let span = quantile_attainability_range(&inst, alpha).unwrap();
        let m = span.lo + span.width() * rng.gen_range(0.0..=1.0);
        let sel = quantile_selection(&inst, alpha, m).map_err(|e| e.to_string())?;
        let got = selection_stats(&inst, &sel).map_err(|e| e.to_string())?.quantile(alpha).unwrap();
        ensure(got == m, format!("case {case}: quantile {got} vs {m}"))?;
    }
    Ok(format!("100 exact coincidences, {compared} oracle comparisons (max error {worst:.1e}), 100 exact attainments"))
}

fn criterion_10() -> Check {
    let full = chi_square_run(200_001);
    let half = chi_square_run(100_000);
    let moved = [
        full.aumann.max_abs_diff(&half.aumann),
        full.medians.max_abs_diff(&half.medians),
        full.general.max_abs_diff(&half.general),
        full.implied.max_abs_diff(&half.implied),
    ];
    let worst = moved.iter().copied().fold(0.0, f64::max);
    ensure(worst < 2e-3, format!("intervals moved by {moved:?}"))?;
    Ok(format!("halving the grid moves reported intervals by at most {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 chi-square example", criterion_1),
        ("2 constant interval closed form", criterion_2),
        ("3 no-shrink example", criterion_3),
        ("4 bathtub exactness", criterion_4),
        ("5 median restriction vs oracle", criterion_5),
        ("6 event-probability duality", criterion_6),
        ("7 worked calibration", criterion_7),
        ("8 moment dual", criterion_8),
        ("9 quantile restriction", criterion_9),
        ("10 refinement stability", criterion_10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Dispatch from a request to the core computations.

use std::fs;

use anyhow::{Context, Result};
use selection_bounds::benchmark::{aumann_interval, median_benchmark, quantile_attainability_range};
use selection_bounds::event::{calibrate_mean, dual_envelope, mean_restricted_prob_bounds, unrestricted_prob_bounds, DualGrid};
use selection_bounds::extensions::moment::check_power;
use selection_bounds::extensions::{moment_restricted_mean_interval, power_image_interval, quantile_restricted_mean_interval, MomentRestriction, QuantileRestriction};
use selection_bounds::median::{marginal_cost_terms, mean_restricted_median_range, median_bounds, partition};
use selection_bounds::model::{INVERSION_TOL, MASS_TOL};
use selection_bounds::oracle::{exact_median_mean_bounds, exact_moment_mean_bounds, exact_prob_bounds, exact_quantile_mean_bounds};
use selection_bounds::{ClosedInterval, ComonotoneSpec, DiscreteInstance, Error};
use sha2::{Digest, Sha256};

use crate::io::parse_csv;
use crate::report::{value, Benchmarks, Diagnosis, Method, NamedValue, OracleCheck, Provenance, Report, Restricted, TaggedInterval, Tolerances, SCHEMA};
use crate::request::{AnalysisRequest, Restriction, Source};

/// Largest instance for which the mean-restricted median range is scanned.
pub const MEDIAN_RANGE_LIMIT: usize = 2000;
/// Mesh the moment oracle starts from.
pub const MOMENT_ORACLE_MESH: usize = 33;

/// An instance together with where it came from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub instance: DiscreteInstance,
    pub source: String,
    pub sha256: String,
    pub grid_size: Option<usize>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load(request: &AnalysisRequest) -> Result<Loaded> {
    match &request.source {
        Source::Csv(path) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let instance = parse_csv(&bytes[..]).with_context(|| format!("loading {}", path.display()))?;
            Ok(Loaded { instance, source: path.display().to_string(), sha256: hex(&Sha256::digest(&bytes)), grid_size: None })
        }
        Source::Spec(spec) => load_spec(spec),
    }
}

/// Discretizes `spec`; the hash covers its canonical text form.
pub fn load_spec(spec: &ComonotoneSpec) -> Result<Loaded> {
    let text = format!("{}:{}@{}", spec.lower_law, spec.upper_law, spec.grid_size);
    let instance = spec.discretize().with_context(|| format!("discretizing {text}"))?;
    Ok(Loaded { instance, sha256: hex(&Sha256::digest(text.as_bytes())), source: text, grid_size: Some(spec.grid_size) })
}

pub fn default_tolerance(restriction: &Restriction) -> f64 {
    match restriction {
        Restriction::Mean { .. } => 1e-6,
        Restriction::Moment { .. } => 1e-4,
        _ => 1e-9,
    }
}

pub fn run(request: &AnalysisRequest) -> Result<Report> {
    run_loaded(&load(request)?, request)
}

fn diagnosis(inequality: &str, value: f64, bound: f64) -> Option<Diagnosis> {
    Some(Diagnosis { inequality: inequality.to_string(), value, bound, violation: (value - bound).abs() })
}

fn range_diagnosis(name: &str, lo_name: &str, hi_name: &str, x: f64, range: ClosedInterval) -> Option<Diagnosis> {
    if x < range.lo {
        diagnosis(&format!("{name} >= {lo_name}"), x, range.lo)
    } else if x > range.hi {
        diagnosis(&format!("{name} <= {hi_name}"), x, range.hi)
    } else {
        None
    }
}

struct Outcome {
    restricted: Option<Restricted>,
    diagnosis: Option<Diagnosis>,
    oracle: Option<OracleCheck>,
}

impl Outcome {
    fn infeasible(d: Option<Diagnosis>) -> Self {
        Outcome { restricted: None, diagnosis: d, oracle: None }
    }
}

/// Runs the oracle when requested and compares it with `reported`.
fn oracle_check<F>(request: &AnalysisRequest, tolerance: f64, reported: ClosedInterval, name: &str, solve: F) -> Option<OracleCheck>
where
    F: FnOnce() -> selection_bounds::Result<ClosedInterval>,
{
    if !request.oracle {
        return None;
    }
    Some(match solve() {
        Ok(iv) => {
            let delta = iv.max_abs_diff(&reported);
            OracleCheck {
                intervals: vec![TaggedInterval::new(name, iv, Method::Oracle)],
                deltas: vec![value(name, delta)],
                tolerance,
                agree: Some(delta <= tolerance),
                note: None,
            }
        }
        Err(e @ Error::InstanceTooLarge { .. }) => {
            OracleCheck { intervals: vec![], deltas: vec![], tolerance, agree: None, note: Some(e.to_string()) }
        }
        Err(e) => OracleCheck { intervals: vec![], deltas: vec![], tolerance, agree: Some(false), note: Some(e.to_string()) },
    })
}

fn no_oracle(request: &AnalysisRequest, tolerance: f64, note: &str) -> Option<OracleCheck> {
    request.oracle.then(|| OracleCheck { intervals: vec![], deltas: vec![], tolerance, agree: None, note: Some(note.to_string()) })
}

pub fn run_loaded(loaded: &Loaded, request: &AnalysisRequest) -> Result<Report> {
    let inst = &loaded.instance;
    let aumann = aumann_interval(inst);
    let tol_kappa = 1e-12 * inst.scale();
    let tolerance = request.tolerance.unwrap_or_else(|| default_tolerance(&request.restriction));
    let benchmarks = Benchmarks {
        mean: TaggedInterval::new("mean", aumann, Method::ClosedForm),
        median: TaggedInterval::new("median", median_benchmark(inst), Method::ClosedForm),
        probability: request.target.as_ref().map(|t| TaggedInterval::new("probability", unrestricted_prob_bounds(inst, t), Method::ClosedForm)),
    };

    let outcome = match request.restriction {
        Restriction::None => Outcome { restricted: None, diagnosis: None, oracle: no_oracle(request, tolerance, "no restriction to verify") },
        Restriction::Mean { kappa } => {
            if !aumann.contains_within(kappa, tol_kappa) {
                Outcome::infeasible(range_diagnosis("kappa", "E y_L", "E y_U", kappa, aumann))
            } else {
                mean_section(inst, request, kappa, tolerance)?
            }
        }
        Restriction::Median { m } => {
            let part = partition(inst, m);
            if part.p_minus > 0.5 + MASS_TOL {
                Outcome::infeasible(diagnosis("P(y_U < m) <= 1/2", part.p_minus, 0.5))
            } else if part.p_plus > 0.5 + MASS_TOL {
                Outcome::infeasible(diagnosis("P(y_L > m) <= 1/2", part.p_plus, 0.5))
            } else {
                let b = median_bounds(inst, m).with_context(|| format!("median restriction m = {m}"))?;
                let mut intervals = vec![TaggedInterval::new("mean", b.interval, Method::ClosedForm)];
                let p = &b.partition;
                let mut values = vec![
                    value("p_minus", p.p_minus),
                    value("p_plus", p.p_plus),
                    value("p0", p.p0),
                    value("alpha_minus", p.alpha_minus),
                    value("alpha_plus", p.alpha_plus),
                ];
                if let Ok(c) = marginal_cost_terms(inst, m) {
                    intervals.push(TaggedInterval::new("mean_from_cost_terms", c.implied, Method::ClosedForm));
                    values.extend([value("s_l", c.s_l), value("s_u", c.s_u)]);
                }
                let mut notes = vec![];
                if b.degenerate {
                    notes.push("contact set is empty: the restriction does not tighten the mean interval".to_string());
                }
                let oracle = oracle_check(request, tolerance, b.interval, "mean", || exact_median_mean_bounds(inst, m).map(|o| o.interval));
                Outcome { restricted: Some(Restricted { intervals, values, notes }), diagnosis: None, oracle }
            }
        }
        Restriction::Quantile { alpha, q } => {
            let range = quantile_attainability_range(inst, alpha).with_context(|| format!("quantile level {alpha}"))?;
            if let Some(d) = range_diagnosis("q", "T^{-1}(alpha)", "C^{-1}(alpha)", q, range) {
                Outcome::infeasible(Some(d))
            } else {
                let r = QuantileRestriction { alpha, q };
                let iv = quantile_restricted_mean_interval(inst, &r).with_context(|| format!("quantile restriction {alpha}, {q}"))?;
                let restricted = Restricted {
                    intervals: vec![TaggedInterval::new("mean", iv, Method::ClosedForm)],
                    values: vec![value("attainable_lo", range.lo), value("attainable_hi", range.hi)],
                    notes: vec!["the lower end is a closure value: it may need P(y < q) = alpha".to_string()],
                };
                let oracle = oracle_check(request, tolerance, iv, "mean", || exact_quantile_mean_bounds(inst, alpha, q).map(|o| o.interval));
                Outcome { restricted: Some(restricted), diagnosis: None, oracle }
            }
        }
        Restriction::Moment { r, mu } => {
            check_power(inst, r).with_context(|| format!("moment restriction r = {r}"))?;
            let image = power_image_interval(inst, r)?;
            let tol = 1e-12 * image.lo.abs().max(image.hi.abs()).max(1.0);
            if !image.contains_within(mu, tol) {
                Outcome::infeasible(range_diagnosis("mu", "E y_L^r", "E y_U^r", mu, image))
            } else {
                let iv = moment_restricted_mean_interval(inst, &MomentRestriction { r, mu_r: mu })?;
                let restricted = Restricted {
                    intervals: vec![TaggedInterval::new("mean", iv, Method::Dual)],
                    values: vec![value("moment_lo", image.lo), value("moment_hi", image.hi)],
                    notes: vec![],
                };
                let oracle = oracle_check(request, tolerance, iv, "mean", || exact_moment_mean_bounds(inst, r, mu, MOMENT_ORACLE_MESH).map(|o| o.interval));
                Outcome { restricted: Some(restricted), diagnosis: None, oracle }
            }
        }
    };

    Ok(Report {
        schema: SCHEMA,
        restriction: request.restriction,
        target: request.target.as_ref().map(|t| t.pieces().iter().map(|p| [p.lo, p.hi]).collect()),
        benchmarks,
        restricted: outcome.restricted,
        diagnosis: outcome.diagnosis,
        oracle: outcome.oracle,
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            source: loaded.source.clone(),
            input_sha256: loaded.sha256.clone(),
            scenarios: inst.len(),
            grid_size: loaded.grid_size,
            tolerances: Tolerances { mass: MASS_TOL, inversion: INVERSION_TOL, oracle_agreement: tolerance },
            seed: None,
        },
    })
}

fn mean_section(inst: &DiscreteInstance, request: &AnalysisRequest, kappa: f64, tolerance: f64) -> Result<Outcome> {
    let mut intervals = Vec::new();
    let mut values: Vec<NamedValue> = Vec::new();
    let mut notes = Vec::new();
    if inst.len() <= MEDIAN_RANGE_LIMIT {
        let range = mean_restricted_median_range(inst, kappa).with_context(|| format!("median range at kappa = {kappa}"))?;
        intervals.push(TaggedInterval::new("median", range, Method::ClosedForm));
    } else {
        notes.push(format!("median range skipped above {MEDIAN_RANGE_LIMIT} scenarios"));
    }
    let Some(target) = &request.target else {
        let oracle = no_oracle(request, tolerance, "the oracle checks the probability bounds; give a target");
        return Ok(Outcome { restricted: Some(Restricted { intervals, values, notes }), diagnosis: None, oracle });
    };
    let bounds = mean_restricted_prob_bounds(inst, target, kappa)?;
    let cal = calibrate_mean(inst, target, kappa)?;
    let dual = dual_envelope(inst, target, kappa, &DualGrid::default())?;
    intervals.push(TaggedInterval::new("probability", bounds, Method::ClosedForm));
    let dual_iv = ClosedInterval::new(dual.lower.min(dual.upper), dual.upper);
    intervals.push(TaggedInterval::new("probability", dual_iv, Method::Dual));
    values.extend([value("lambda", cal.lambda), value("theta", cal.theta)]);
    if let Some(t) = cal.threshold {
        values.push(value("threshold", t));
    }
    values.extend([value("dual_lambda_upper", dual.lambda_upper), value("dual_lambda_lower", dual.lambda_lower)]);
    notes.push(format!("calibration regime: {:?}", cal.regime));
    let oracle = oracle_check(request, tolerance, bounds, "probability", || exact_prob_bounds(inst, target, kappa, 0));
    Ok(Outcome { restricted: Some(Restricted { intervals, values, notes }), diagnosis: None, oracle })
}

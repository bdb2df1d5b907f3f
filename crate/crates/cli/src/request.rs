//! What to compute: one data source, at most one restriction, an optional
//! target set and curve export.

use std::path::PathBuf;

use anyhow::{Context, Result};
use selection_bounds::{ComonotoneSpec, ParametricLaw, TargetSet};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Csv(PathBuf),
    Spec(ComonotoneSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Restriction {
    None,
    Mean { kappa: f64 },
    Median { m: f64 },
    Moment { r: f64, mu: f64 },
    Quantile { alpha: f64, q: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveExport {
    pub dir: PathBuf,
    /// Rows of the CDF files.
    pub points: usize,
    /// Rows of the bound-curve file.
    pub curve_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRequest {
    pub source: Source,
    pub restriction: Restriction,
    pub target: Option<TargetSet>,
    pub oracle: bool,
    /// Oracle agreement tolerance; a per-restriction default when `None`.
    pub tolerance: Option<f64>,
    pub curve_export: Option<CurveExport>,
}

impl AnalysisRequest {
    pub fn new(source: Source, restriction: Restriction) -> Self {
        AnalysisRequest { source, restriction, target: None, oracle: false, tolerance: None, curve_export: None }
    }
}

/// `lower_law:upper_law`, e.g. `chi2(2):chi2(5)`.
pub fn parse_spec(text: &str, grid_size: usize) -> Result<ComonotoneSpec> {
    let (lower, upper) = text.split_once(':').context("spec must look like lower_law:upper_law")?;
    let lower: ParametricLaw = lower.parse().with_context(|| format!("lower law {lower:?}"))?;
    let upper: ParametricLaw = upper.parse().with_context(|| format!("upper law {upper:?}"))?;
    Ok(ComonotoneSpec::new(lower, upper, grid_size))
}

/// A JSON list of `[a, b]` pairs; `[a, a]` is the point `a`.
pub fn parse_target(text: &str) -> Result<TargetSet> {
    let pairs: Vec<(f64, f64)> = serde_json::from_str(text).context("target must be a JSON list of [a, b] pairs")?;
    Ok(TargetSet::new(&pairs)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_and_target_parsing() {
        let spec = parse_spec("chi2(2):chi2(5)", 10).unwrap();
        assert_eq!(spec.lower_law, ParametricLaw::ChiSquare { df: 2.0 });
        assert_eq!(spec.grid_size, 10);
        assert!(parse_spec("chi2(2)", 10).is_err());
        let t = parse_target("[[0.8, 1], [2, 2]]").unwrap();
        assert!(t.contains(2.0) && t.contains(0.9) && !t.contains(1.5));
        assert!(parse_target("[]").unwrap().pieces().is_empty());
        assert!(parse_target("[[1, 0]]").is_err());
    }
}

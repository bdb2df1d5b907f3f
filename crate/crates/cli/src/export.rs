//! Plain-text curve files behind the figures: marginal CDFs, extremal
//! selection CDFs, and bound curves, with a `schema.json` sidecar.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use selection_bounds::benchmark::{aumann_interval, quantile_attainability_range};
use selection_bounds::event::{calibrate_mean, mean_restricted_prob_bounds};
use selection_bounds::extensions::quantile::quantile_extremal_selection;
use selection_bounds::extensions::{moment_restricted_mean_interval, power_image_interval, quantile_restricted_mean_interval, MomentRestriction, QuantileRestriction};
use selection_bounds::median::{extremal_selection, median_restricted_mean_interval, Extremum};
use selection_bounds::{ClosedInterval, DiscreteInstance, Selection, Side};
use serde::Serialize;

use crate::analysis::{load, Loaded};
use crate::request::{AnalysisRequest, CurveExport, Restriction};

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub description: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileSchema {
    pub file: String,
    pub description: String,
    pub columns: Vec<Column>,
}

const fn col(name: &'static str, description: &'static str) -> Column {
    Column { name, description }
}

fn grid(range: ClosedInterval, n: usize) -> Vec<f64> {
    if n <= 1 || range.width() == 0.0 {
        return vec![range.lo];
    }
    (0..n).map(|k| range.lo + range.width() * k as f64 / (n - 1) as f64).collect()
}

fn write_table(path: &Path, schema: &FileSchema, rows: &[Vec<f64>]) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# {}", schema.description)?;
    writeln!(w, "# {}", schema.columns.iter().map(|c| c.name).collect::<Vec<_>>().join("\t"))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{}", line.join("\t"))?;
    }
    w.flush()?;
    Ok(())
}

struct Writer<'a> {
    dir: &'a Path,
    schemas: Vec<FileSchema>,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn table(&mut self, file: &str, description: String, columns: Vec<Column>, rows: Vec<Vec<f64>>) -> Result<()> {
        let schema = FileSchema { file: file.to_string(), description, columns };
        let path = self.dir.join(file);
        write_table(&path, &schema, &rows)?;
        self.schemas.push(schema);
        self.written.push(path);
        Ok(())
    }
}

fn cdf_rows(ts: &[f64], selections: &[&Selection]) -> Vec<Vec<f64>> {
    let laws: Vec<_> = selections.iter().map(|s| s.law()).collect();
    ts.iter().map(|&t| std::iter::once(t).chain(laws.iter().map(|l| l.cdf(t))).collect()).collect()
}

/// Loads the request's instance and writes its curve files into `dir`.
pub fn export_curves(request: &AnalysisRequest, dir: &Path) -> Result<Vec<PathBuf>> {
    let settings = request.curve_export.clone().unwrap_or(CurveExport { dir: dir.to_path_buf(), points: 2001, curve_points: 101 });
    export_loaded(&load(request)?, request, dir, &settings)
}

pub fn export_loaded(loaded: &Loaded, request: &AnalysisRequest, dir: &Path, settings: &CurveExport) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let inst = &loaded.instance;
    let mut w = Writer { dir, schemas: vec![], written: vec![] };
    let span = support(inst);
    let ts = grid(span, settings.points);

    let lower = Selection::endpoint(inst, Side::Lower);
    let upper = Selection::endpoint(inst, Side::Upper);
    w.table(
        "marginal_cdfs.tsv",
        "marginal CDFs of the interval endpoints".into(),
        vec![col("t", "evaluation point"), col("F_L", "P(y_L <= t)"), col("F_U", "P(y_U <= t)")],
        cdf_rows(&ts, &[&lower, &upper]),
    )?;

    extremal_cdfs(&mut w, inst, request, &ts)?;
    bound_curves(&mut w, inst, request, settings.curve_points)?;

    let schema_path = dir.join("schema.json");
    fs::write(&schema_path, serde_json::to_string_pretty(&w.schemas)?).with_context(|| format!("writing {}", schema_path.display()))?;
    w.written.push(schema_path);
    Ok(w.written)
}

fn support(inst: &DiscreteInstance) -> ClosedInterval {
    let lo = inst.scenarios().iter().map(|s| s.lower).fold(f64::INFINITY, f64::min);
    let hi = inst.scenarios().iter().map(|s| s.upper).fold(f64::NEG_INFINITY, f64::max);
    ClosedInterval::new(lo, hi)
}

fn extremal_cdfs(w: &mut Writer, inst: &DiscreteInstance, request: &AnalysisRequest, ts: &[f64]) -> Result<()> {
    let columns = || vec![col("t", "evaluation point"), col("F_max", "CDF of the selection attaining the upper mean"), col("F_min", "CDF of the selection attaining the lower mean")];
    match request.restriction {
        Restriction::Median { m } => {
            let (Ok(hi), Ok(lo)) = (extremal_selection(inst, m, Extremum::Max), extremal_selection(inst, m, Extremum::Min)) else {
                return Ok(());
            };
            w.table("extremal_cdfs.tsv", format!("extremal selections with median {m}"), columns(), cdf_rows(ts, &[&hi, &lo]))
        }
        Restriction::Quantile { alpha, q } => {
            let r = QuantileRestriction { alpha, q };
            let (Ok(hi), Ok(lo)) = (quantile_extremal_selection(inst, &r, Extremum::Max), quantile_extremal_selection(inst, &r, Extremum::Min)) else {
                return Ok(());
            };
            w.table("extremal_cdfs.tsv", format!("extremal selections with {alpha}-quantile {q}"), columns(), cdf_rows(ts, &[&hi, &lo]))
        }
        Restriction::Mean { kappa } => {
            let Some(target) = &request.target else { return Ok(()) };
            let Ok(cal) = calibrate_mean(inst, target, kappa) else { return Ok(()) };
            w.table(
                "extremal_cdfs.tsv",
                format!("calibrated threshold selection with mean {kappa}"),
                vec![col("t", "evaluation point"), col("F_cal", "CDF of the selection attaining U(kappa)")],
                cdf_rows(ts, &[&cal.selection]),
            )
        }
        Restriction::None | Restriction::Moment { .. } => Ok(()),
    }
}

fn bound_curves(w: &mut Writer, inst: &DiscreteInstance, request: &AnalysisRequest, n: usize) -> Result<()> {
    let aumann = aumann_interval(inst);
    match (&request.restriction, &request.target) {
        (Restriction::Mean { .. } | Restriction::None, Some(target)) => {
            let rows = grid(aumann, n)
                .into_iter()
                .filter_map(|k| mean_restricted_prob_bounds(inst, target, k).ok().map(|b| vec![k, b.lo, b.hi]))
                .collect();
            w.table(
                "bound_curves.tsv",
                "probability bounds over the mean".into(),
                vec![col("kappa", "mean restriction E y = kappa"), col("L", "lower bound on P(y in A)"), col("U", "upper bound on P(y in A)")],
                rows,
            )
        }
        (Restriction::Quantile { alpha, .. }, _) => {
            let alpha = *alpha;
            let range = quantile_attainability_range(inst, alpha)?;
            let rows = grid(range, n)
                .into_iter()
                .filter_map(|q| quantile_restricted_mean_interval(inst, &QuantileRestriction { alpha, q }).ok().map(|b| vec![q, b.lo, b.hi]))
                .collect();
            w.table(
                "bound_curves.tsv",
                format!("mean bounds over the {alpha}-quantile"),
                vec![col("q", "quantile restriction"), col("E_min", "lower mean bound"), col("E_max", "upper mean bound")],
                rows,
            )
        }
        (Restriction::Moment { r, .. }, _) => {
            let r = *r;
            let image = power_image_interval(inst, r)?;
            let rows = grid(image, n)
                .into_iter()
                .filter_map(|mu_r| moment_restricted_mean_interval(inst, &MomentRestriction { r, mu_r }).ok().map(|b| vec![mu_r, b.lo, b.hi]))
                .collect();
            w.table(
                "bound_curves.tsv",
                format!("mean bounds over the moment of order {r}"),
                vec![col("mu", "moment restriction E y^r = mu"), col("E_min", "lower mean bound"), col("E_max", "upper mean bound")],
                rows,
            )
        }
        _ => {
            let range = quantile_attainability_range(inst, 0.5)?;
            let rows = grid(range, n)
                .into_iter()
                .filter_map(|m| median_restricted_mean_interval(inst, m).ok().map(|b| vec![m, b.lo, b.hi]))
                .collect();
            w.table(
                "bound_curves.tsv",
                "mean bounds over the median".into(),
                vec![col("m", "median restriction"), col("E_min", "lower mean bound"), col("E_max", "upper mean bound")],
                rows,
            )
        }
    }
}

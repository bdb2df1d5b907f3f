//! CSV ingestion, JSON reports and curve export around `selection-bounds`.

pub mod analysis;
pub mod export;
pub mod io;
pub mod report;
pub mod request;

pub use analysis::{load, run, run_loaded, Loaded};
pub use export::export_curves;
pub use io::{load_csv, parse_csv, write_csv, CsvError};
pub use report::{Method, Report};
pub use request::{AnalysisRequest, CurveExport, Restriction, Source};

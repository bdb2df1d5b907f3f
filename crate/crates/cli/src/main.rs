use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use selection_bounds::{ComonotoneSpec, ParametricLaw};
use selection_bounds_cli::analysis::{load, load_spec, run_loaded};
use selection_bounds_cli::export::export_loaded;
use selection_bounds_cli::request::{parse_spec, parse_target};
use selection_bounds_cli::{AnalysisRequest, CurveExport, Restriction, Source};

#[derive(Parser)]
#[command(name = "selection-bounds", version, about = "Sharp bounds for selections of random intervals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// CSV file with header lower,upper[,weight]
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    input: Option<PathBuf>,
    /// Comonotone parametric pair, e.g. chi2(2):chi2(5)
    #[arg(long)]
    spec: Option<String>,
    /// Grid size used to discretize --spec
    #[arg(long, default_value_t = 1000)]
    grid: usize,
}

#[derive(Args)]
struct Common {
    /// Target set as a JSON list of [a,b] pairs, e.g. [[0.8,1]]
    #[arg(long)]
    target: Option<String>,
    /// Cross-check against the exhaustive oracle
    #[arg(long)]
    oracle: bool,
    /// Oracle agreement tolerance
    #[arg(long)]
    tolerance: Option<f64>,
    /// Directory for curve files
    #[arg(long)]
    export: Option<PathBuf>,
    /// Rows in the CDF files
    #[arg(long, default_value_t = 2001)]
    points: usize,
    /// Rows in the bound-curve file
    #[arg(long, default_value_t = 101)]
    curve_points: usize,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Unrestricted mean, median and probability bounds
    Bounds {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// Mean bounds when m is a median
    RestrictMedian {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
    },
    /// Bounds on P(y in A) when E y = kappa
    RestrictMeanProb {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
    },
    /// Mean bounds when E y^r = mu
    RestrictMoment {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        r: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
    },
    /// Mean bounds when the alpha-quantile is q
    RestrictQuantile {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
    },
    /// Compare closed-form bounds with the oracle; nonzero exit on disagreement
    Verify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<f64>,
        #[arg(long, requires = "mu")]
        r: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "r")]
        mu: Option<f64>,
        #[arg(long, requires = "q")]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "alpha")]
        q: Option<f64>,
    },
    /// The chi2(2)/chi2(5) example with m = 0.3 Med(y_L) + 0.7 Med(y_U)
    ExampleChi2 {
        #[arg(long, default_value_t = 200_001)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn source(input: &Input) -> Result<Source> {
    match (&input.input, &input.spec) {
        (Some(path), None) => Ok(Source::Csv(path.clone())),
        (None, Some(spec)) => Ok(Source::Spec(parse_spec(spec, input.grid)?)),
        _ => bail!("give exactly one of --input and --spec"),
    }
}

fn verify_restriction(m: Option<f64>, kappa: Option<f64>, r: Option<f64>, mu: Option<f64>, alpha: Option<f64>, q: Option<f64>) -> Result<Restriction> {
    let mut found = vec![];
    if let Some(m) = m {
        found.push(Restriction::Median { m });
    }
    if let Some(kappa) = kappa {
        found.push(Restriction::Mean { kappa });
    }
    if let (Some(r), Some(mu)) = (r, mu) {
        found.push(Restriction::Moment { r, mu });
    }
    if let (Some(alpha), Some(q)) = (alpha, q) {
        found.push(Restriction::Quantile { alpha, q });
    }
    match found.as_slice() {
        [one] => Ok(*one),
        [] => bail!("verify needs one restriction: --m, --kappa, --r/--mu or --alpha/--q"),
        _ => bail!("verify takes one restriction at a time"),
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    let verify = matches!(cli.command, Command::Verify { .. });
    let mut preloaded = None;
    let (source, restriction, common) = match cli.command {
        Command::Bounds { input, common } => (source(&input)?, Restriction::None, common),
        Command::RestrictMedian { input, common, m } => (source(&input)?, Restriction::Median { m }, common),
        Command::RestrictMeanProb { input, common, kappa } => {
            if common.target.is_none() {
                bail!("restrict-mean-prob needs --target");
            }
            (source(&input)?, Restriction::Mean { kappa }, common)
        }
        Command::RestrictMoment { input, common, r, mu } => (source(&input)?, Restriction::Moment { r, mu }, common),
        Command::RestrictQuantile { input, common, alpha, q } => (source(&input)?, Restriction::Quantile { alpha, q }, common),
        Command::Verify { input, common, m, kappa, r, mu, alpha, q } => (source(&input)?, verify_restriction(m, kappa, r, mu, alpha, q)?, common),
        Command::ExampleChi2 { grid, common } => {
            let spec = ComonotoneSpec::new(ParametricLaw::ChiSquare { df: 2.0 }, ParametricLaw::ChiSquare { df: 5.0 }, grid);
            let loaded = load_spec(&spec)?;
            let medians = selection_bounds::benchmark::median_benchmark(&loaded.instance);
            let m = 0.3 * medians.lo + 0.7 * medians.hi;
            preloaded = Some(loaded);
            (Source::Spec(spec), Restriction::Median { m }, common)
        }
    };
    let target = common.target.as_deref().map(parse_target).transpose()?;
    let curve_export = common.export.clone().map(|dir| CurveExport { dir, points: common.points, curve_points: common.curve_points });
    let request = AnalysisRequest { source, restriction, target, oracle: common.oracle || verify, tolerance: common.tolerance, curve_export };

    let loaded = match preloaded {
        Some(l) => l,
        None => load(&request)?,
    };
    let report = run_loaded(&loaded, &request)?;
    let json = report.to_json();
    match &common.out {
        Some(path) => fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = writeln!(stdout, "{json}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    if let Some(settings) = &request.curve_export {
        if !report.is_infeasible() {
            let files = export_loaded(&loaded, &request, &settings.dir, settings)?;
            eprintln!("wrote {} curve files to {}", files.len(), settings.dir.display());
        }
    }
    Ok(if report.is_infeasible() {
        ExitCode::from(2)
    } else if report.oracle_disagrees() || (verify && report.oracle.as_ref().is_some_and(|o| o.agree.is_none())) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

//! Scenario CSV files: header `lower,upper[,weight]`, one scenario per row.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use selection_bounds::{DiscreteInstance, Scenario};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("file has no scenario rows")]
    EmptyFile,
    #[error("header must be lower,upper[,weight], found {0:?}")]
    Header(String),
    #[error("line {line}, column {column}: cannot parse {text:?} as a number")]
    ParseError { line: u64, column: usize, text: String },
    #[error("line {0}: lower exceeds upper")]
    InvertedInterval(u64),
    #[error("line {0}: weight must be positive")]
    NonpositiveWeight(u64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] selection_bounds::Error),
}

pub fn load_csv(path: &Path) -> Result<DiscreteInstance, CsvError> {
    let bytes = fs::read(path).map_err(|source| CsvError::Io { path: path.to_path_buf(), source })?;
    parse_csv(&bytes[..])
}

pub fn parse_csv<R: Read>(reader: R) -> Result<DiscreteInstance, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_ascii_lowercase).collect();
    let weighted = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["lower", "upper"] => false,
        ["lower", "upper", "weight"] => true,
        _ => return Err(CsvError::Header(header.join(","))),
    };
    let mut scenarios = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |column: usize| -> Result<f64, CsvError> {
            let text = record.get(column).unwrap_or("");
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CsvError::ParseError { line, column: column + 1, text: text.to_string() })
        };
        let (lower, upper) = (field(0)?, field(1)?);
        let weight = if weighted { field(2)? } else { 1.0 };
        if lower > upper + selection_bounds::model::INVERSION_TOL {
            return Err(CsvError::InvertedInterval(line));
        }
        if weight <= 0.0 {
            return Err(CsvError::NonpositiveWeight(line));
        }
        scenarios.push(Scenario::new(lower, upper, weight));
    }
    if scenarios.is_empty() {
        return Err(CsvError::EmptyFile);
    }
    Ok(selection_bounds::model::normalize(scenarios)?)
}

/// Writes `lower,upper,weight` with shortest round-trip float formatting.
pub fn write_csv<W: Write>(instance: &DiscreteInstance, writer: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["lower", "upper", "weight"])?;
    for s in instance.scenarios() {
        w.write_record([s.lower.to_string(), s.upper.to_string(), s.weight.to_string()])?;
    }
    w.flush().map_err(|source| CsvError::Io { path: PathBuf::from("<writer>"), source })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_weights_without_weight_column() {
        let inst = parse_csv("lower,upper\n0,1\n1,2\n".as_bytes()).unwrap();
        assert_eq!(inst.len(), 2);
        assert!(inst.scenarios().iter().all(|s| s.weight == 0.5));
    }

    #[test]
    fn two_state_file() {
        let inst = parse_csv("lower,upper,weight\n-2,0,1\n0,2,1\n".as_bytes()).unwrap();
        assert_eq!(inst, DiscreteInstance::from_triples(&[(-2.0, 0.0, 0.5), (0.0, 2.0, 0.5)]).unwrap());
    }

    #[test]
    fn error_paths() {
        assert!(matches!(parse_csv("lower,upper\n2,1\n".as_bytes()), Err(CsvError::InvertedInterval(2))));
        assert!(matches!(parse_csv("lower,upper\n".as_bytes()), Err(CsvError::EmptyFile)));
        assert!(matches!(parse_csv("".as_bytes()), Err(CsvError::Header(_))));
        assert!(matches!(
            parse_csv("lower,upper\n0,1\n0,x\n".as_bytes()),
            Err(CsvError::ParseError { line: 3, column: 2, .. })
        ));
        assert!(matches!(parse_csv("lower,upper,weight\n0,1,0\n".as_bytes()), Err(CsvError::NonpositiveWeight(2))));
        assert!(matches!(parse_csv("a,b\n0,1\n".as_bytes()), Err(CsvError::Header(_))));
    }

    #[test]
    fn round_trip() {
        let inst = DiscreteInstance::from_triples(&[(0.1, 0.7, 1.0 / 3.0), (-1e-300, 2.5e10, 2.0 / 3.0)]).unwrap();
        let mut buf = Vec::new();
        write_csv(&inst, &mut buf).unwrap();
        assert_eq!(parse_csv(&buf[..]).unwrap(), inst);
    }
}

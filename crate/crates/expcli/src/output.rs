//! CSV and JSON persistence of result rows.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};
use crate::scenario::ResultRow;

pub const CSV_HEADER: [&str; 22] = [
    "scenario",
    "K",
    "lambda",
    "epsilon",
    "hbar",
    "t",
    "c1",
    "c2",
    "re_c3",
    "otoc",
    "fotoc",
    "cf",
    "mean_p",
    "mean_p2",
    "norm_log",
    "c1_pred",
    "c2_pred",
    "re_c3_pred",
    "otoc_pred",
    "cf_pred",
    "p2_pred",
    "norm_log_pred",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` means JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("unknown format {s:?}, expected csv or json"))),
        }
    }
}

/// Floats use the shortest decimal that parses back to the same value;
/// missing values are empty CSV fields and JSON `null`.
pub fn write_rows<W: Write>(rows: &[ResultRow], format: Format, out: W, path: &Path) -> Result<()> {
    match format {
        Format::Csv => {
            let csv_err = |source| CliError::Csv {
                path: path.to_path_buf(),
                source,
            };
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for r in rows {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush().map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows).map_err(|source| CliError::Json {
                path: path.to_path_buf(),
                source,
            })?;
            writeln!(out).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    }
}

pub fn emit_results(rows: &[ResultRow], format: Format, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_rows(rows, format, BufWriter::new(file), path)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match Format::from_path(path) {
        Format::Json => serde_json::from_reader(std::io::BufReader::new(file)).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        }),
        Format::Csv => {
            let mut r = csv::Reader::from_reader(file);
            let header = r.headers().map_err(|source| CliError::Csv {
                path: path.to_path_buf(),
                source,
            })?;
            if header.iter().ne(CSV_HEADER) {
                return Err(CliError::Config(format!(
                    "{}: unexpected CSV header",
                    path.display()
                )));
            }
            r.deserialize()
                .collect::<std::result::Result<Vec<ResultRow>, _>>()
                .map_err(|source| CliError::Csv {
                    path: path.to_path_buf(),
                    source,
                })
        }
    }
}

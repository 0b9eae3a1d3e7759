//! Data-file ingestion: CSV (comma-separated, optional header, decimal
//! point, UTF-8) and JSON (array of numbers, or object mapping column
//! names to arrays).

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One ingested value or a positioned parse error.
#[derive(Debug, Clone)]
pub enum Row {
    Value(f64),
    Bad { position: usize, message: String },
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Row::Value(v) => write!(f, "{v}"),
            Row::Bad { position, message } => write!(f, "row {position}: {message}"),
        }
    }
}

/// Loads a data file; each input row yields either a value or a positioned
/// error. Fails outright only when the file is unreadable, the column is
/// missing, or no row yields a value.
pub fn load(path: &Path, format: Option<Format>, column: Option<&str>) -> Result<Vec<Row>> {
    let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    });
    let rows = match format {
        Format::Csv => load_csv(path, column)?,
        Format::Json => load_json(path, column)?,
    };
    if !rows.iter().any(|r| matches!(r, Row::Value(_))) {
        bail!("{}: no usable values", path.display());
    }
    Ok(rows)
}

fn parse_finite(field: &str) -> Result<f64, String> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse '{field}' as a real number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("value '{field}' is not finite"))
    }
}

fn load_csv(path: &Path, column: Option<&str>) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<Result<_, _>>()
        .with_context(|| format!("cannot read {}", path.display()))?;
    if records.is_empty() {
        bail!("{}: empty file", path.display());
    }
    // resolve the column: a numeric spec is an index, anything else is a
    // header name looked up in the first row
    let (col, mut start) = match column {
        None => (0usize, 0usize),
        Some(c) => match c.parse::<usize>() {
            Ok(idx) => (idx, 0),
            Err(_) => {
                let idx = records[0]
                    .iter()
                    .position(|h| h == c)
                    .with_context(|| format!("column '{c}' not found in the header row"))?;
                (idx, 1)
            }
        },
    };
    // optional header: skip the first row if its target field is not numeric
    if start == 0 {
        if let Some(field) = records[0].get(col) {
            if parse_finite(field).is_err() {
                start = 1;
            }
        }
    }
    let mut rows = Vec::new();
    for (i, record) in records.iter().enumerate().skip(start) {
        let position = i + 1; // 1-based file row
        match record.get(col) {
            None => rows.push(Row::Bad {
                position,
                message: format!("missing column {col}"),
            }),
            Some(field) => match parse_finite(field) {
                Ok(v) => rows.push(Row::Value(v)),
                Err(message) => rows.push(Row::Bad { position, message }),
            },
        }
    }
    Ok(rows)
}

fn load_json(path: &Path, column: Option<&str>) -> Result<Vec<Row>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot open {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{}: invalid JSON", path.display()))?;
    let array = match &value {
        serde_json::Value::Array(a) => a.clone(),
        serde_json::Value::Object(map) => {
            let key = match column {
                Some(c) => c.to_string(),
                None if map.len() == 1 => map.keys().next().expect("len checked").clone(),
                None => bail!(
                    "{}: object has {} keys; pick one with --column",
                    path.display(),
                    map.len()
                ),
            };
            match map.get(&key) {
                Some(serde_json::Value::Array(a)) => a.clone(),
                Some(_) => bail!("{}: key '{key}' is not an array", path.display()),
                None => bail!("{}: key '{key}' not found", path.display()),
            }
        }
        _ => bail!(
            "{}: expected an array or an object of arrays",
            path.display()
        ),
    };
    Ok(array
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let position = i + 1;
            match v.as_f64() {
                Some(x) if x.is_finite() => Row::Value(x),
                Some(x) => Row::Bad {
                    position,
                    message: format!("value {x} is not finite"),
                },
                None => Row::Bad {
                    position,
                    message: format!("element '{v}' is not a number"),
                },
            }
        })
        .collect())
}

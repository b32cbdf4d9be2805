use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::Dataset;
use crate::{Error, Result};

enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

/// Loads a headed, comma-separated file.
///
/// Numeric columns are kept in file order. Text columns are one-hot encoded
/// (one column per category, categories sorted by name) and appended after
/// the numeric ones. Class labels are numbered in sorted name order.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file, label_column, path)
}

/// [`load_csv`] over any reader; `source` only labels error messages.
pub fn parse_csv(
    reader: impl Read,
    label_column: &str,
    source: impl AsRef<Path>,
) -> Result<Dataset> {
    let source = source.as_ref().to_path_buf();
    let fail = |message: String| Error::Csv {
        path: source.clone(),
        message,
    };

    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(::csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| fail(format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(fail("missing header row".into()));
    }
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| {
            fail(format!(
                "label column `{label_column}` not found (columns: {})",
                header.join(", ")
            ))
        })?;

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (i, record) in rdr.records().enumerate() {
        // Line 1 is the header.
        let line = i + 2;
        let record = record.map_err(|e| fail(format!("line {line}: {e}")))?;
        for (col, value) in record.iter().enumerate() {
            if value.is_empty() {
                return Err(fail(format!(
                    "line {line}, column `{}`: missing value",
                    header[col]
                )));
            }
            cells[col].push(value.to_owned());
        }
    }
    let n_rows = cells[label_idx].len();
    if n_rows == 0 {
        return Err(fail("no data rows".into()));
    }

    let label_strings = std::mem::take(&mut cells[label_idx]);
    let class_names: Vec<String> = label_strings
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if class_names.len() < 2 {
        return Err(fail(format!(
            "label column `{label_column}` has a single class `{}`",
            class_names[0]
        )));
    }
    let labels: Vec<usize> = label_strings
        .iter()
        .map(|s| class_names.binary_search(s).expect("class collected above"))
        .collect();

    let mut numeric: Vec<(String, Vec<f64>)> = Vec::new();
    let mut categorical: Vec<(String, Vec<String>)> = Vec::new();
    for (col, values) in cells.into_iter().enumerate() {
        if col == label_idx {
            continue;
        }
        match classify(values) {
            Ok(Column::Numeric(v)) => numeric.push((header[col].clone(), v)),
            Ok(Column::Categorical(v)) => categorical.push((header[col].clone(), v)),
            Err((row, cell)) => {
                return Err(fail(format!(
                    "line {}, column `{}`: cannot parse `{cell}` as a number",
                    row + 2,
                    header[col]
                )))
            }
        }
    }

    let mut feature_names: Vec<String> = numeric.iter().map(|(n, _)| n.clone()).collect();
    let mut columns: Vec<Vec<f64>> = numeric.into_iter().map(|(_, v)| v).collect();
    for (name, values) in categorical {
        let categories: BTreeSet<&String> = values.iter().collect();
        for cat in categories {
            feature_names.push(format!("{name}={cat}"));
            columns.push(
                values
                    .iter()
                    .map(|v| if v == cat { 1.0 } else { 0.0 })
                    .collect(),
            );
        }
    }
    if columns.is_empty() {
        return Err(fail("no feature columns besides the label".into()));
    }

    let mut features = Vec::with_capacity(n_rows * columns.len());
    for row in 0..n_rows {
        features.extend(columns.iter().map(|c| c[row]));
    }
    Dataset::new(features, labels, feature_names, class_names).map_err(|e| fail(e.to_string()))
}

/// A column is numeric if every cell parses, categorical if none does.
/// A mix is an error pointing at the first cell that did not parse.
fn classify(values: Vec<String>) -> std::result::Result<Column, (usize, String)> {
    let parsed: Vec<Option<f64>> = values
        .iter()
        .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect();
    if parsed.iter().all(Option::is_some) {
        return Ok(Column::Numeric(parsed.into_iter().flatten().collect()));
    }
    if parsed.iter().all(Option::is_none) {
        return Ok(Column::Categorical(values));
    }
    let row = parsed.iter().position(Option::is_none).unwrap();
    Err((row, values[row].clone()))
}

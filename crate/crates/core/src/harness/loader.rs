//! Dataset and cost-profile files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::cost::{Cost, CostProfile};
use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result};

/// A CSV dataset with its column names and label coding.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub data: Dataset,
    pub feature_names: Vec<String>,
    /// Original label text for codes `1..=J`, in first-appearance order.
    pub classes: Vec<String>,
}

impl LoadedDataset {
    /// Sidecar table mapping label codes to their original text.
    pub fn write_label_map<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "code,label")?;
        for (k, name) in self.classes.iter().enumerate() {
            writeln!(out, "{},{}", k + 1, name)?;
        }
        Ok(())
    }
}

/// Reads a comma-delimited file with a header row. The label column is found
/// by name; every other column must be numeric. Labels are coded `1..=J` in
/// order of first appearance. Error locations are 1-based data rows (header
/// excluded) and 1-based columns.
pub fn read_dataset<R: Read>(input: R, label_column: &str) -> Result<LoadedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let headers = match reader.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].trim().is_empty()) => h.clone(),
        Ok(_) => return Err(Error::EmptyDataset),
        Err(e) => {
            return Err(Error::ParseError {
                row: 0,
                col: 0,
                msg: e.to_string(),
            })
        }
    };
    let label_at = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| Error::UnknownLabelColumn(label_column.to_string()))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != label_at)
        .map(|(_, h)| h.trim().to_string())
        .collect();

    let mut values = Vec::new();
    let mut y = Vec::new();
    let mut codes: HashMap<String, usize> = HashMap::new();
    let mut classes = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::ParseError {
            row,
            col: 0,
            msg: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::ParseError {
                row,
                col: record.len().min(headers.len()) + 1,
                msg: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (k, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if k == label_at {
                if cell.is_empty() {
                    return Err(Error::ParseError {
                        row,
                        col: k + 1,
                        msg: "empty label".into(),
                    });
                }
                let next = codes.len() + 1;
                let code = *codes.entry(cell.to_string()).or_insert_with(|| {
                    classes.push(cell.to_string());
                    next
                });
                y.push(code);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::ParseError {
                    row,
                    col: k + 1,
                    msg: if cell.is_empty() {
                        "empty cell".into()
                    } else {
                        format!("'{cell}' is not numeric")
                    },
                })?;
                if !v.is_finite() {
                    return Err(Error::ParseError {
                        row,
                        col: k + 1,
                        msg: format!("'{cell}' is not finite"),
                    });
                }
                values.push(v);
            }
        }
    }
    if y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let x = Matrix::new(y.len(), feature_names.len(), values)?;
    Ok(LoadedDataset {
        data: Dataset::new(x, y)?,
        feature_names,
        classes,
    })
}

pub fn load_dataset_csv(path: &Path, label_column: &str) -> Result<LoadedDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, label_column)
}

/// Writes features plus a trailing integer `label` column.
pub fn write_dataset<W: Write>(data: &Dataset, feature_names: &[String], out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    let io = |e| Error::io("<dataset>", e);
    let header: Vec<&str> = feature_names.iter().map(String::as_str).chain(["label"]).collect();
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for i in 0..data.n() {
        for v in data.x.row(i) {
            write!(out, "{v},").map_err(io)?;
        }
        writeln!(out, "{}", data.y[i]).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Two columns per line: a feature name or 1-based index, and its cost. A
/// header line is recognised by a non-numeric cost field.
pub fn read_cost_profile<R: Read>(input: R, feature_names: Option<&[String]>) -> Result<CostProfile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut entries: Vec<(usize, Cost)> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::ParseError {
            row,
            col: 0,
            msg: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::ParseError {
                row,
                col: 0,
                msg: "expected two columns: feature, cost".into(),
            });
        }
        let key = record[0].trim();
        let Ok(value) = record[1].trim().parse::<f64>() else {
            if row == 1 {
                continue;
            }
            return Err(Error::ParseError {
                row,
                col: 2,
                msg: format!("'{}' is not a cost", record[1].trim()),
            });
        };
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::InvalidCost(value));
        }
        let index = match key.parse::<usize>() {
            Ok(i) => i,
            Err(_) => feature_names
                .and_then(|names| names.iter().position(|n| n == key))
                .map(|k| k + 1)
                .ok_or_else(|| Error::ParseError {
                    row,
                    col: 1,
                    msg: format!("unknown feature '{key}'"),
                })?,
        };
        entries.push((index, Cost::from_units(value)));
    }
    if entries.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let p = entries.len();
    let mut costs = vec![None; p];
    for (index, cost) in entries {
        if index == 0 || index > p {
            return Err(Error::InvalidVariableIndex { index, p });
        }
        if costs[index - 1].replace(cost).is_some() {
            return Err(Error::InvalidConfig(format!("feature {index} listed twice")));
        }
    }
    CostProfile::new(costs.into_iter().map(|c| c.expect("every index filled")).collect())
}

pub fn load_cost_profile(path: &Path, feature_names: Option<&[String]>) -> Result<CostProfile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_cost_profile(file, feature_names)
}

pub fn write_cost_profile<W: Write>(profile: &CostProfile, mut out: W) -> std::io::Result<()> {
    writeln!(out, "feature,cost")?;
    for (k, c) in profile.costs().iter().enumerate() {
        writeln!(out, "{},{}", k + 1, c)?;
    }
    Ok(())
}

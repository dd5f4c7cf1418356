//! Classification tasks stored as `task_id,label,f1,...,fd` rows.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::within_task::{LossFn, LossKind};

use super::sequence::TaskSequence;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    /// Number of classes; inferred as `max label + 1` (at least 2) when absent.
    pub classes: Option<usize>,
    /// Standardize each feature with the task's own mean and deviation.
    pub standardize: bool,
}

struct Row {
    line: usize,
    label: usize,
    features: Vec<f64>,
}

/// Loads one logistic task per `task_id`, in order of first appearance.
/// An empty file yields no tasks.
pub fn load_csv_tasks(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Vec<TaskSequence>> {
    let text = std::fs::read_to_string(path)?;
    parse_csv_tasks(&text, schema)
}

pub fn parse_csv_tasks(text: &str, schema: &CsvSchema) -> Result<Vec<TaskSequence>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            row: 1,
            reason: e.to_string(),
        })?
        .clone();
    let dim = check_header(&headers)?;

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<Row>> = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Csv {
            row: line,
            reason: e.to_string(),
        })?;
        if record.len() != dim + 2 {
            return Err(Error::Csv {
                row: line,
                reason: format!("expected {} fields, found {}", dim + 2, record.len()),
            });
        }
        let task_id = record[0].to_string();
        let label: usize = record[1].parse().map_err(|_| Error::Csv {
            row: line,
            reason: format!("label `{}` is not a nonnegative integer", &record[1]),
        })?;
        let features = (2..record.len())
            .map(|j| {
                record[j]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Csv {
                        row: line,
                        reason: format!("feature `{}` is not a finite number", &record[j]),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if !groups.contains_key(&task_id) {
            order.push(task_id.clone());
        }
        groups.entry(task_id).or_default().push(Row { line, label, features });
    }

    let max_label = groups.values().flatten().map(|r| r.label).max().unwrap_or(0);
    let classes = schema.classes.unwrap_or((max_label + 1).max(2));
    if classes < 2 {
        return Err(Error::invalid("classification tasks need at least two classes"));
    }

    order
        .into_iter()
        .map(|id| {
            let mut rows = groups.remove(&id).expect("grouped above");
            if let Some(bad) = rows.iter().find(|r| r.label >= classes) {
                return Err(Error::Csv {
                    row: bad.line,
                    reason: format!("label {} outside 0..{classes}", bad.label),
                });
            }
            if schema.standardize {
                standardize(&mut rows, dim);
            }
            let losses = rows
                .into_iter()
                .map(|r| LossFn::logistic(Point::new(r.features), r.label, classes))
                .collect::<Result<Vec<_>>>()?;
            TaskSequence::new(losses)
        })
        .collect()
}

fn check_header(headers: &csv::StringRecord) -> Result<usize> {
    let bad = |reason: String| Error::Csv { row: 1, reason };
    if headers.len() < 3 || &headers[0] != "task_id" || &headers[1] != "label" {
        return Err(bad("header must start with `task_id,label,f1`".into()));
    }
    for (j, name) in headers.iter().enumerate().skip(2) {
        if name != format!("f{}", j - 1) {
            return Err(bad(format!("column {} should be `f{}`, found `{name}`", j + 1, j - 1)));
        }
    }
    Ok(headers.len() - 2)
}

fn standardize(rows: &mut [Row], dim: usize) {
    let n = rows.len() as f64;
    for j in 0..dim {
        let mean = rows.iter().map(|r| r.features[j]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r.features[j] - mean).powi(2)).sum::<f64>() / n;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        for r in rows.iter_mut() {
            r.features[j] = (r.features[j] - mean) / sd;
        }
    }
}

/// Writes logistic tasks in the format read by [`load_csv_tasks`]. Task ids are
/// the task indices.
pub fn write_csv_tasks(path: impl AsRef<Path>, tasks: &[TaskSequence]) -> Result<()> {
    let mut dim = None;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (t, task) in tasks.iter().enumerate() {
        for loss in task.losses() {
            let LossKind::Logistic { features, label, .. } = loss.kind() else {
                return Err(Error::Unsupported("only logistic losses can be written as CSV".into()));
            };
            match dim {
                None => dim = Some(features.dim()),
                Some(d) if d != features.dim() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: features.dim(),
                    })
                }
                _ => {}
            }
            let mut row = vec![t.to_string(), label.to_string()];
            row.extend(features.iter().map(|v| format!("{v:?}")));
            rows.push(row);
        }
    }
    let Some(dim) = dim else {
        std::fs::write(path, "")?;
        return Ok(());
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_to_io)?;
    let mut header = vec!["task_id".to_string(), "label".to_string()];
    header.extend((1..=dim).map(|j| format!("f{j}")));
    writer.write_record(&header).map_err(csv_to_io)?;
    for row in rows {
        writer.write_record(&row).map_err(csv_to_io)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_to_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

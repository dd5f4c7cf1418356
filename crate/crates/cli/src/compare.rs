//! The `compare` command: aligns run summaries on their (m, seed) grid and
//! reports per-m paired-median TAR deltas against the first series.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::output::fmt17;

#[derive(Debug, Clone, Deserialize)]
struct SummaryFile {
    name: String,
    cells: Vec<CellFile>,
}

#[derive(Debug, Clone, Deserialize)]
struct CellFile {
    variant: String,
    m: usize,
    seed: u64,
    tar: Option<f64>,
    envelope: Option<f64>,
    violations: usize,
}

/// One variant of one summary.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    cells: Vec<CellFile>,
}

impl Series {
    fn get(&self, m: usize, seed: u64) -> Option<&CellFile> {
        self.cells.iter().find(|c| c.m == m && c.seed == seed)
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub series: Vec<Series>,
    /// `(m, seed)` keys present in every series.
    pub aligned: Vec<(usize, u64)>,
    pub dropped: usize,
}

pub fn load_series(paths: &[impl AsRef<Path>]) -> Result<Vec<Series>> {
    if paths.len() < 2 {
        return Err(CliError::config("compare needs at least two summaries"));
    }
    let mut series = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let file: SummaryFile = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: not a run summary ({e})", path.display())))?;
        let mut variants: Vec<String> = Vec::new();
        for c in &file.cells {
            if !variants.contains(&c.variant) {
                variants.push(c.variant.clone());
            }
        }
        for v in variants {
            series.push(Series {
                label: format!("{}/{}", file.name, v),
                cells: file.cells.iter().filter(|c| c.variant == v).cloned().collect(),
            });
        }
    }
    let labels: Vec<String> = series.iter().map(|s| s.label.clone()).collect();
    for (i, s) in series.iter_mut().enumerate() {
        if labels.iter().filter(|l| **l == s.label).count() > 1 {
            s.label = format!("{}#{}", s.label, i + 1);
        }
    }
    Ok(series)
}

pub fn align(series: Vec<Series>) -> Comparison {
    let keys = |s: &Series| s.cells.iter().map(|c| (c.m, c.seed)).collect::<BTreeSet<_>>();
    let all: BTreeSet<(usize, u64)> = series.iter().flat_map(keys).collect();
    let aligned: Vec<(usize, u64)> = all
        .iter()
        .copied()
        .filter(|&(m, seed)| series.iter().all(|s| s.get(m, seed).is_some()))
        .collect();
    Comparison {
        dropped: all.len() - aligned.len(),
        series,
        aligned,
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

fn opt17(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

impl Comparison {
    /// Per-m median over seeds of `TAR_k − TAR_first` for every later series.
    pub fn median_deltas(&self) -> Vec<(usize, Vec<Option<f64>>)> {
        let ms: BTreeSet<usize> = self.aligned.iter().map(|k| k.0).collect();
        let base = &self.series[0];
        ms.into_iter()
            .map(|m| {
                let deltas = self.series[1..]
                    .iter()
                    .map(|s| {
                        let diffs: Vec<f64> = self
                            .aligned
                            .iter()
                            .filter(|k| k.0 == m)
                            .filter_map(|&(m, seed)| {
                                let a = base.get(m, seed)?.tar?;
                                let b = s.get(m, seed)?.tar?;
                                Some(b - a)
                            })
                            .collect();
                        median(diffs)
                    })
                    .collect();
                (m, deltas)
            })
            .collect()
    }

    /// The aligned table, a blank line, then the delta table.
    pub fn render(&self) -> String {
        let mut out = String::from("m,seed");
        for s in &self.series {
            write!(out, ",{0}:tar,{0}:bound,{0}:violations", s.label).unwrap();
        }
        out.push('\n');
        for &(m, seed) in &self.aligned {
            write!(out, "{m},{seed}").unwrap();
            for s in &self.series {
                let c = s.get(m, seed).expect("aligned keys exist in every series");
                write!(out, ",{},{},{}", opt17(c.tar), opt17(c.envelope), c.violations).unwrap();
            }
            out.push('\n');
        }
        out.push('\n');
        out.push('m');
        for s in &self.series[1..] {
            write!(out, ",{}:median_delta_tar", s.label).unwrap();
        }
        out.push('\n');
        for (m, deltas) in self.median_deltas() {
            write!(out, "{m}").unwrap();
            for d in deltas {
                write!(out, ",{}", opt17(d)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn warning(&self) -> Option<String> {
        (self.dropped > 0).then(|| {
            format!(
                "warning: sweep grids differ; {} (m, seed) cells missing from some summaries were left out",
                self.dropped
            )
        })
    }
}

//! The `qg` command: quadratic-growth estimates of summed logistic losses as
//! the number of samples grows.

use std::path::Path;

use fmrl_core::analysis::qg_alpha_estimate;
use fmrl_core::geometry::ConvexSet;
use fmrl_core::registry::Registry;
use fmrl_core::tasks::{gen_clustered_logistic, hindsight_oracle, ClusteredLogistic, OracleStatus};
use fmrl_core::within_task::LossSum;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Plan, Source};
use crate::error::{CliError, Result};
use crate::output::{fmt17, write, write_json, F17};

#[derive(Debug, Clone)]
pub struct QgRow {
    pub m: usize,
    pub seed: u64,
    pub delta: f64,
    pub eps: f64,
    pub alpha: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QgPoint {
    pub m: usize,
    pub mean_alpha: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct QgSummary {
    pub name: String,
    pub command: &'static str,
    pub config_hash: String,
    pub estimator: String,
    pub points: Vec<QgPoint>,
    /// Least-squares slope of mean α against m.
    pub slope: F17,
}

pub fn run_qg(plan: &Plan, registry: &Registry) -> Result<Vec<QgRow>> {
    let qg = plan.qg.as_ref().expect("validated for qg");
    let Source::ClusteredLogistic {
        classes,
        cluster_radius,
        feature_scale,
    } = plan.source
    else {
        unreachable!("validated for qg");
    };
    let ConvexSet::Ball { radius, .. } = plan.set else {
        unreachable!("validated for qg");
    };
    let jobs: Vec<(usize, u64)> = qg
        .ms
        .iter()
        .flat_map(|&m| plan.config.seeds.iter().map(move |&s| (m, s)))
        .collect();
    let nested = jobs
        .par_iter()
        .map(|&(m, seed)| -> Result<Vec<QgRow>> {
            let spec = ClusteredLogistic {
                d: plan.config.d,
                classes,
                m,
                tasks: 1,
                center: plan.center.clone(),
                cluster_radius,
                feature_scale,
                seed,
            };
            let task = gen_clustered_logistic(&spec)?.remove(0);
            let star = hindsight_oracle(task.losses(), &plan.set, &plan.oracle)?;
            if star.status == OracleStatus::Failed {
                return Err(CliError::Runtime(format!("m = {m}, seed = {seed}: the hindsight oracle failed")));
            }
            let estimator = registry.qg(&qg.estimator, seed)?;
            let est = qg_alpha_estimate(
                estimator.as_ref(),
                &LossSum(task.losses()),
                &star.point,
                radius,
                &qg.deltas,
                &qg.fw,
            )?;
            Ok((0..est.deltas.len())
                .map(|i| QgRow {
                    m,
                    seed,
                    delta: est.deltas[i],
                    eps: est.eps[i],
                    alpha: est.alpha[i],
                    gap: est.gaps[i],
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Least-squares slope of `ys` against `xs`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn summarize(plan: &Plan, rows: &[QgRow]) -> QgSummary {
    let qg = plan.qg.as_ref().expect("validated for qg");
    let means: Vec<f64> = qg
        .ms
        .iter()
        .map(|&m| {
            let a: Vec<f64> = rows.iter().filter(|r| r.m == m).map(|r| r.alpha).collect();
            a.iter().sum::<f64>() / a.len() as f64
        })
        .collect();
    let xs: Vec<f64> = qg.ms.iter().map(|&m| m as f64).collect();
    QgSummary {
        name: plan.config.name.clone(),
        command: "qg",
        config_hash: plan.hash.clone(),
        estimator: qg.estimator.clone(),
        points: qg
            .ms
            .iter()
            .zip(&means)
            .map(|(&m, &a)| QgPoint { m, mean_alpha: F17(a) })
            .collect(),
        slope: F17(fitted_slope(&xs, &means)),
    }
}

pub fn write_qg(out: &Path, rows: &[QgRow], summary: &QgSummary) -> Result<()> {
    let mut csv = String::from("m,seed,delta,eps,alpha,fw_gap\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.m,
            r.seed,
            fmt17(r.delta),
            fmt17(r.eps),
            fmt17(r.alpha),
            fmt17(r.gap)
        ));
    }
    write(&out.join("alpha_vs_m.csv"), csv)?;
    write_json(&out.join("summary.json"), summary)
}

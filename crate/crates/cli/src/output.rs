//! Byte-stable artifacts: every float is written with 17 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fmrl_core::fmrl::{RegretLedger, TaskRecord};
use serde::{Serialize, Serializer};

use crate::error::{io_err, Result};

/// Environment variable naming the directory that receives all runs.
pub const OUTPUT_ROOT_ENV: &str = "FMRL_OUTPUT_ROOT";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fmrl-runs"))
}

/// `x` in scientific notation with 17 significant digits, which round-trips
/// every `f64`. Non-finite values print as `nan`, `inf` or `-inf`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// A float that serializes to JSON with 17 significant digits, or `null`
/// when it is not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serde_json::Number::from_str(&fmt17(self.0))
                .expect("scientific notation is a JSON number")
                .serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

pub fn f17s(v: &[f64]) -> Vec<F17> {
    v.iter().map(|&x| F17(x)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerRow {
    pub t: usize,
    pub m: usize,
    pub agent_loss: F17,
    pub comparator_loss: F17,
    pub regret: F17,
    pub d_t: F17,
    pub eta_t: F17,
    pub k: u32,
    pub violated: bool,
    pub root_divergence: F17,
    pub oracle_status: fmrl_core::tasks::OracleStatus,
}

impl From<&TaskRecord> for LedgerRow {
    fn from(r: &TaskRecord) -> Self {
        LedgerRow {
            t: r.t,
            m: r.m,
            agent_loss: F17(r.agent_loss),
            comparator_loss: F17(r.comparator_loss),
            regret: F17(r.regret),
            d_t: F17(r.d_t),
            eta_t: F17(r.eta_t),
            k: r.k_before,
            violated: r.violated,
            root_divergence: F17(r.root_divergence),
            oracle_status: r.oracle_status,
        }
    }
}

pub fn ledger_rows(ledger: &RegretLedger) -> Vec<LedgerRow> {
    ledger.records.iter().map(LedgerRow::from).collect()
}

pub fn ledger_csv(ledger: &RegretLedger) -> String {
    let mut out = String::from("t,m,agent_loss,comparator_loss,regret,D_t,eta_t,k,violated,root_divergence,oracle_status\n");
    for r in &ledger.records {
        let status = match r.oracle_status {
            fmrl_core::tasks::OracleStatus::Converged => "converged",
            fmrl_core::tasks::OracleStatus::Approximate => "approximate",
            fmrl_core::tasks::OracleStatus::Failed => "failed",
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.m,
            fmt17(r.agent_loss),
            fmt17(r.comparator_loss),
            fmt17(r.regret),
            fmt17(r.d_t),
            fmt17(r.eta_t),
            r.k_before,
            r.violated,
            fmt17(r.root_divergence),
            status
        )
        .expect("writing to a String");
    }
    out
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, contents).map_err(io_err(path))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("summaries serialize");
    text.push('\n');
    write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123_456_789.123_456_78, 0.0] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
    }

    #[test]
    fn json_numbers_keep_their_digits() {
        let text = serde_json::to_string(&vec![F17(0.1), F17(f64::NAN)]).unwrap();
        assert_eq!(text, "[1.0000000000000001e-1,null]");
    }
}

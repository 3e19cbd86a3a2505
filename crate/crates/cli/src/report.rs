//! JSON and CSV emission. Numbers in CSV use 17 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tensor_hw::verify::{BoundReport, DecouplingReport, DominanceReport, Verdict};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Header of every dominance-style CSV summary; frozen.
pub const CSV_HEADER: &str = "theta,p_hat,ci_low,ci_high,bound,t_star,verdict";

pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn dominance_csv(report: &DominanceReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_float(r.theta),
            fmt_float(r.tail.p_hat),
            fmt_float(r.tail.ci_low),
            fmt_float(r.tail.ci_high),
            opt(r.bound.as_ref().map(|b| b.value)),
            opt(r.bound.as_ref().map(|b| b.t_star)),
            r.verdict.as_str()
        );
    }
    out
}

/// Bound-only summary: tail columns stay empty; the verdict is `refused`
/// when no bound can be certified, blank otherwise.
pub fn bound_csv(report: &BoundReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let verdict = if r.bound.is_none() || !report.assumptions_ok { Verdict::Refused.as_str() } else { "" };
        let _ = writeln!(
            out,
            "{},,,,{},{},{}",
            fmt_float(r.theta),
            opt(r.bound.as_ref().map(|b| b.value)),
            opt(r.bound.as_ref().map(|b| b.t_star)),
            verdict
        );
    }
    out
}

pub fn decoupling_csv(report: &DecouplingReport) -> String {
    let mut out = String::from("theta,lhs_p,lhs_ci_low,lhs_ci_high,rhs_p,rhs_ci_low,rhs_ci_high\n");
    for (l, r) in report.lhs.iter().zip(&report.rhs) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_float(l.theta),
            fmt_float(l.p_hat),
            fmt_float(l.ci_low),
            fmt_float(l.ci_high),
            fmt_float(r.p_hat),
            fmt_float(r.ci_low),
            fmt_float(r.ci_high)
        );
    }
    out
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a ExperimentConfig,
    report: &'a R,
}

pub fn to_json<R: Serialize>(command: &str, config: &ExperimentConfig, report: &R) -> Result<String, CliError> {
    let env = Envelope { schema_version: config.schema_version, command, config, report };
    serde_json::to_string_pretty(&env).map_err(|e| CliError::Other(e.to_string())).map(|mut s| {
        s.push('\n');
        s
    })
}

/// Write `<dir>/<stem>.json` and `<dir>/<stem>.csv`, returning both paths.
pub fn write_pair(dir: &Path, stem: &str, json: &str, csv: &str) -> Result<[PathBuf; 2], CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Other(format!("cannot create {}: {e}", dir.display())))?;
    let paths = [dir.join(format!("{stem}.json")), dir.join(format!("{stem}.csv"))];
    for (p, body) in paths.iter().zip([json, csv]) {
        std::fs::write(p, body).map_err(|e| CliError::Other(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(2.0), "2.0000000000000000e0");
        assert_eq!(fmt_float(f64::NAN), "nan");
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
        for x in [0.1, 1.0 / 3.0, 6.02e23, -4.9e-300] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn write_pair_creates_directory() {
        let dir = tempfile::tempdir().unwrap();
        let [json, csv] = write_pair(&dir.path().join("nested"), "r", "{}\n", "a\n").unwrap();
        assert_eq!(std::fs::read_to_string(json).unwrap(), "{}\n");
        assert_eq!(std::fs::read_to_string(csv).unwrap(), "a\n");
    }
}

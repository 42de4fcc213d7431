//! CSV emitters for study results and figure trajectories.
//!
//! Numbers are written with 17 significant digits so parsing them back
//! recovers the exact f64; infinities use the literals `inf` / `-inf`.
//! Files are written to a sibling temp path and renamed into place, so a
//! failed run never leaves a partial file behind.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::study::{StudyResult, StudyRow};

pub const RESULTS_HEADER: &str = "distribution,n,method,coverage,mean_length,rmsl,scaled_rmsl,\
infinite_count,finite_mean_length,finite_rmsl,winkler_a1,winkler_005,f_tilde_1";

pub const TRAJECTORY_HEADER: &str = "distribution,method,n,coverage,scaled_rmsl,is_infinite";

/// Format with 17 significant digits (round-trip exact for f64).
pub fn format_real(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Parse a real serialized by [`format_real`].
pub fn parse_real(s: &str) -> Result<f64> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| Error::Data(format!("bad real `{s}`"))),
    }
}

/// Write `contents` atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp~");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// One parsed line of a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub distribution: String,
    pub method: String,
    pub row: StudyRow,
}

/// Render the results table (one row per `(n, method)`).
pub fn results_csv(result: &StudyResult) -> String {
    let mut out = String::with_capacity(256 * (result.rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    let dist = result.config.distribution.name();
    for (method, row) in &result.rows {
        out.push_str(&format!(
            "{dist},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.n,
            method.name(),
            format_real(row.coverage),
            format_real(row.mean_length),
            format_real(row.rmsl),
            format_real(row.scaled_rmsl),
            row.infinite_count,
            format_real(row.finite_mean_length),
            format_real(row.finite_rmsl),
            format_real(row.winkler_a1),
            format_real(row.winkler_005),
            format_real(row.f_tilde_1),
        ));
    }
    out
}

/// Write the results table to `path` (write-then-rename).
pub fn emit_results(result: &StudyResult, path: &Path) -> Result<()> {
    write_atomic(path, &results_csv(result))
}

/// Parse a results file produced by [`emit_results`].
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RESULTS_HEADER => {}
        other => return Err(Error::Data(format!("unexpected results header: {other:?}"))),
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 13 {
            return Err(Error::Data(format!("line {}: expected 13 fields", idx + 2)));
        }
        let n: usize = fields[1]
            .parse()
            .map_err(|_| Error::Data(format!("line {}: bad n `{}`", idx + 2, fields[1])))?;
        let infinite_count: u64 = fields[7]
            .parse()
            .map_err(|_| Error::Data(format!("line {}: bad count `{}`", idx + 2, fields[7])))?;
        records.push(ResultRecord {
            distribution: fields[0].to_string(),
            method: fields[2].to_string(),
            row: StudyRow {
                n,
                coverage: parse_real(fields[3])?,
                mean_length: parse_real(fields[4])?,
                rmsl: parse_real(fields[5])?,
                scaled_rmsl: parse_real(fields[6])?,
                infinite_count,
                finite_mean_length: parse_real(fields[8])?,
                finite_rmsl: parse_real(fields[9])?,
                winkler_a1: parse_real(fields[10])?,
                winkler_005: parse_real(fields[11])?,
                f_tilde_1: parse_real(fields[12])?,
            },
        });
    }
    Ok(records)
}

/// Render trajectory data for the coverage-vs-scaled-RMSL figures.
///
/// Rows are grouped into two panels (`n <= 10` and `n >= 10`, both clipped to
/// the study range; `n = 10` appears in both). After each panel block one
/// reference row `(coverage, scaled_rmsl) = (0.95, 0)` with method
/// `reference` and `n = 0` is emitted. Infinite entries are flagged in the
/// last column, not dropped.
pub fn trajectories_csv(result: &StudyResult) -> String {
    let mut out = String::new();
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    let dist = result.config.distribution.name();
    let panels: [(usize, usize); 2] = [(result.config.n_min, 10), (10, result.config.n_max)];
    for (panel_lo, panel_hi) in panels {
        let lo = panel_lo.max(result.config.n_min);
        let hi = panel_hi.min(result.config.n_max);
        if lo > hi {
            continue;
        }
        let mut any = false;
        for method in &result.config.methods {
            for (m, row) in &result.rows {
                if m != method || row.n < lo || row.n > hi {
                    continue;
                }
                any = true;
                out.push_str(&format!(
                    "{dist},{},{},{},{},{}\n",
                    m.name(),
                    row.n,
                    format_real(row.coverage),
                    format_real(row.scaled_rmsl),
                    u8::from(!row.scaled_rmsl.is_finite()),
                ));
            }
        }
        if any {
            out.push_str(&format!(
                "{dist},reference,0,{},{},0\n",
                format_real(0.95),
                format_real(0.0)
            ));
        }
    }
    out
}

/// Write trajectory data to `path` (write-then-rename).
pub fn emit_trajectories(result: &StudyResult, path: &Path) -> Result<()> {
    write_atomic(path, &trajectories_csv(result))
}

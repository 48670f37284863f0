//! Per-step run traces and their CSV form.
//!
//! One file per (seed, filter, chart), named
//! `trace_s{seed:03}_{filter}_{chart}.csv`. Header row, comma separated,
//! floats printed with 17 significant digits (`{:.16e}`, round-trippable),
//! flags as 0/1. Columns:
//!
//! | column | meaning |
//! |---|---|
//! | `t` | time, s |
//! | `yaw`, `pitch`, `roll` | truth attitude, intrinsic Z-Y-X, rad |
//! | `p_x`, `p_y`, `p_z` | truth position |
//! | `yaw_hat`, `pitch_hat`, `roll_hat` | estimated attitude |
//! | `p_hat_x`, `p_hat_y`, `p_hat_z` | estimated position |
//! | `att_err` | normalized attitude error of the estimate vs truth |
//! | `pos_err` | Euclidean position error vs truth |
//! | `b_omega_hat_{x,y,z}` | angular-velocity bias estimate |
//! | `b_v_hat_{x,y,z}` | linear-velocity bias estimate |
//! | `sigma_hat_{x,y,z}` | adaptive gain (covariance-bound) estimate |
//! | `clamped` | 1 if the step's singularity guard clamped a denominator |
//! | `gimbal_truth`, `gimbal_est` | 1 if the Euler extraction hit lock |

use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{Chart, Filter};
use crate::error::HarnessError;

pub const CSV_COLUMNS: [&str; 27] = [
    "t",
    "yaw",
    "pitch",
    "roll",
    "p_x",
    "p_y",
    "p_z",
    "yaw_hat",
    "pitch_hat",
    "roll_hat",
    "p_hat_x",
    "p_hat_y",
    "p_hat_z",
    "att_err",
    "pos_err",
    "b_omega_hat_x",
    "b_omega_hat_y",
    "b_omega_hat_z",
    "b_v_hat_x",
    "b_v_hat_y",
    "b_v_hat_z",
    "sigma_hat_x",
    "sigma_hat_y",
    "sigma_hat_z",
    "clamped",
    "gimbal_truth",
    "gimbal_est",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub truth_euler: [f64; 3],
    pub truth_p: [f64; 3],
    pub est_euler: [f64; 3],
    pub est_p: [f64; 3],
    pub att_err: f64,
    pub pos_err: f64,
    pub b_omega_hat: [f64; 3],
    pub b_v_hat: [f64; 3],
    pub sigma_hat: [f64; 3],
    pub clamped: bool,
    pub gimbal_truth: bool,
    pub gimbal_est: bool,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub seed: u64,
    pub filter: Filter,
    pub chart: Chart,
    pub rows: Vec<TraceRow>,
    /// Steps on which the singularity guard clamped a denominator.
    pub clamp_steps: usize,
    /// Steps ending with at least one negative `sigma_hat` component (the
    /// adaptation law is left unprojected by design).
    pub sigma_negative_steps: usize,
}

pub fn trace_filename(seed: u64, filter: Filter, chart: Chart) -> String {
    format!(
        "trace_s{seed:03}_{}_{}.csv",
        filter.as_str(),
        chart.as_str()
    )
}

impl RunTrace {
    pub fn filename(&self) -> String {
        trace_filename(self.seed, self.filter, self.chart)
    }

    /// Writes the trace into `dir` under its canonical filename.
    pub fn write_csv(&self, dir: &Path) -> Result<PathBuf, HarnessError> {
        if self.rows.is_empty() {
            return Err(HarnessError::Runtime(
                "refusing to write an empty trace".into(),
            ));
        }
        let path = dir.join(self.filename());
        let file = std::fs::File::create(&path).map_err(HarnessError::io(&path))?;
        let mut out = std::io::BufWriter::new(file);
        let emit = |out: &mut std::io::BufWriter<std::fs::File>, row: &TraceRow| {
            let f = |x: f64| format!("{x:.16e}");
            let b = |x: bool| if x { "1" } else { "0" };
            writeln!(
                out,
                "{}",
                [
                    f(row.t),
                    f(row.truth_euler[0]),
                    f(row.truth_euler[1]),
                    f(row.truth_euler[2]),
                    f(row.truth_p[0]),
                    f(row.truth_p[1]),
                    f(row.truth_p[2]),
                    f(row.est_euler[0]),
                    f(row.est_euler[1]),
                    f(row.est_euler[2]),
                    f(row.est_p[0]),
                    f(row.est_p[1]),
                    f(row.est_p[2]),
                    f(row.att_err),
                    f(row.pos_err),
                    f(row.b_omega_hat[0]),
                    f(row.b_omega_hat[1]),
                    f(row.b_omega_hat[2]),
                    f(row.b_v_hat[0]),
                    f(row.b_v_hat[1]),
                    f(row.b_v_hat[2]),
                    f(row.sigma_hat[0]),
                    f(row.sigma_hat[1]),
                    f(row.sigma_hat[2]),
                    b(row.clamped).to_string(),
                    b(row.gimbal_truth).to_string(),
                    b(row.gimbal_est).to_string(),
                ]
                .join(",")
            )
        };
        writeln!(out, "{}", CSV_COLUMNS.join(",")).map_err(HarnessError::io(&path))?;
        for row in &self.rows {
            emit(&mut out, row).map_err(HarnessError::io(&path))?;
        }
        out.flush().map_err(HarnessError::io(&path))?;
        Ok(path)
    }
}

/// The identity and error series read back from one trace file: enough
/// for statistics and plotting without holding every column.
#[derive(Debug, Clone)]
pub struct TraceSummaryData {
    pub seed: u64,
    pub filter: Filter,
    pub chart: Chart,
    /// `(t, att_err, pos_err)` per row.
    pub series: Vec<(f64, f64, f64)>,
    pub clamp_steps: usize,
    pub sigma_negative_steps: usize,
}

/// Parses `trace_s{seed}_{filter}_{chart}.csv` names.
pub fn parse_trace_filename(name: &str) -> Option<(u64, Filter, Chart)> {
    let rest = name.strip_prefix("trace_s")?.strip_suffix(".csv")?;
    let mut parts = rest.splitn(3, '_');
    let seed: u64 = parts.next()?.parse().ok()?;
    let filter = match parts.next()? {
        "semi-direct" => Filter::SemiDirect,
        "direct" => Filter::Direct,
        _ => return None,
    };
    let chart = match parts.next()? {
        "matrix" => Chart::Matrix,
        "quaternion" => Chart::Quaternion,
        _ => return None,
    };
    Some((seed, filter, chart))
}

/// Reads one trace CSV back, validating the header against the schema.
pub fn read_trace(path: &Path) -> Result<TraceSummaryData, HarnessError> {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let (seed, filter, chart) = parse_trace_filename(&name).ok_or_else(|| {
        HarnessError::Runtime(format!("`{name}` is not a recognized trace filename"))
    })?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != CSV_COLUMNS {
        return Err(HarnessError::Runtime(format!(
            "{}: header does not match the trace schema",
            path.display()
        )));
    }

    let idx_t = 0;
    let idx_att = 13;
    let idx_pos = 14;
    let idx_sigma = 21;
    let idx_clamped = 24;
    let mut series = Vec::new();
    let mut clamp_steps = 0usize;
    let mut sigma_negative_steps = 0usize;
    for record in reader.records() {
        let record =
            record.map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
        let row_no = series.len() + 1;
        let cell = |i: usize| -> Result<f64, HarnessError> {
            record.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| {
                HarnessError::Runtime(format!(
                    "{}: row {row_no}: bad float in column {}",
                    path.display(),
                    CSV_COLUMNS[i]
                ))
            })
        };
        series.push((cell(idx_t)?, cell(idx_att)?, cell(idx_pos)?));
        clamp_steps += usize::from(cell(idx_clamped)? != 0.0);
        sigma_negative_steps += usize::from(
            cell(idx_sigma)? < 0.0 || cell(idx_sigma + 1)? < 0.0 || cell(idx_sigma + 2)? < 0.0,
        );
    }
    if series.is_empty() {
        return Err(HarnessError::Runtime(format!(
            "{}: trace has no rows",
            path.display()
        )));
    }
    Ok(TraceSummaryData {
        seed,
        filter,
        chart,
        series,
        clamp_steps,
        sigma_negative_steps,
    })
}

/// All traces under `dir`, sorted by (seed, filter, chart).
pub fn read_trace_dir(dir: &Path) -> Result<Vec<TraceSummaryData>, HarnessError> {
    let mut traces = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(HarnessError::io(dir))?;
    for entry in entries {
        let entry = entry.map_err(HarnessError::io(dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if parse_trace_filename(&name).is_some() {
            traces.push(read_trace(&entry.path())?);
        }
    }
    if traces.is_empty() {
        return Err(HarnessError::Runtime(format!(
            "no trace files found in {}",
            dir.display()
        )));
    }
    traces.sort_by_key(|t| (t.seed, t.filter, t.chart));
    Ok(traces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filename_roundtrip() {
        for filter in [Filter::SemiDirect, Filter::Direct] {
            for chart in [Chart::Matrix, Chart::Quaternion] {
                let name = trace_filename(7, filter, chart);
                assert_eq!(parse_trace_filename(&name), Some((7, filter, chart)));
            }
        }
        assert_eq!(parse_trace_filename("trace_s1_bogus_matrix.csv"), None);
        assert_eq!(parse_trace_filename("notes.csv"), None);
    }
}

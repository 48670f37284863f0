//! Window statistics over run traces.
//!
//! Conventions, also stated in the report header: the STD is the
//! population convention (divide by N); pooled moments are computed from
//! per-seed moments, so with equal row counts the pooled mean is exactly
//! the mean of the per-seed means. All sums run in fixed (row, then seed)
//! order so results are reproducible bit for bit.

use serde::Serialize;

use crate::config::{Chart, Filter, Resolved};
use crate::error::HarnessError;
use crate::trace::{RunTrace, TraceSummaryData};

/// Mean/STD/sup of one error series inside the window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesStats {
    pub mean: f64,
    pub std: f64,
    pub sup: f64,
    pub n: usize,
    /// Raw second moment, kept so pooling can reconstruct the variance.
    #[serde(skip)]
    pub mean_sq: f64,
}

#[derive(Debug, Clone)]
pub struct SeedStats {
    pub seed: u64,
    pub filter: Filter,
    pub chart: Chart,
    pub att: SeriesStats,
    pub pos: SeriesStats,
    /// Attitude error of the first row (t = 0).
    pub att_initial: f64,
    pub clamp_steps: usize,
    pub sigma_negative_steps: usize,
}

#[derive(Debug, Clone)]
pub struct PooledStats {
    pub filter: Filter,
    pub chart: Chart,
    pub att: SeriesStats,
    pub pos: SeriesStats,
    pub seeds: usize,
}

const WINDOW_EPS: f64 = 1e-9;

fn series(values: impl Iterator<Item = f64>) -> SeriesStats {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut sup = f64::NEG_INFINITY;
    for v in values {
        n += 1;
        sum += v;
        sum_sq += v * v;
        sup = sup.max(v);
    }
    let nf = n as f64;
    let mean = sum / nf;
    let mean_sq = sum_sq / nf;
    SeriesStats {
        mean,
        std: (mean_sq - mean * mean).max(0.0).sqrt(),
        sup,
        n,
        mean_sq,
    }
}

fn window_series(
    series_rows: &[(f64, f64, f64)],
    window: (f64, f64),
) -> Result<(SeriesStats, SeriesStats), HarnessError> {
    let in_window = |t: f64| t >= window.0 - WINDOW_EPS && t <= window.1 + WINDOW_EPS;
    let att = series(
        series_rows
            .iter()
            .filter(|(t, _, _)| in_window(*t))
            .map(|(_, a, _)| *a),
    );
    if att.n == 0 {
        return Err(HarnessError::Runtime(format!(
            "statistics window [{}, {}] contains no trace rows",
            window.0, window.1
        )));
    }
    let pos = series(
        series_rows
            .iter()
            .filter(|(t, _, _)| in_window(*t))
            .map(|(_, _, p)| *p),
    );
    Ok((att, pos))
}

/// Window statistics straight from an in-memory trace.
pub fn seed_stats_from_rows(trace: &RunTrace, window: (f64, f64)) -> SeedStats {
    let rows: Vec<(f64, f64, f64)> = trace
        .rows
        .iter()
        .map(|r| (r.t, r.att_err, r.pos_err))
        .collect();
    let (att, pos) = window_series(&rows, window).expect("runner traces always cover the window");
    SeedStats {
        seed: trace.seed,
        filter: trace.filter,
        chart: trace.chart,
        att,
        pos,
        att_initial: trace.rows[0].att_err,
        clamp_steps: trace.clamp_steps,
        sigma_negative_steps: trace.sigma_negative_steps,
    }
}

/// Window statistics from a trace read back from CSV.
pub fn seed_stats_from_csv(
    data: &TraceSummaryData,
    window: (f64, f64),
) -> Result<SeedStats, HarnessError> {
    let (att, pos) = window_series(&data.series, window)?;
    Ok(SeedStats {
        seed: data.seed,
        filter: data.filter,
        chart: data.chart,
        att,
        pos,
        att_initial: data.series[0].1,
        clamp_steps: data.clamp_steps,
        sigma_negative_steps: data.sigma_negative_steps,
    })
}

/// Pools per-seed statistics for each (filter, chart) group, in sorted
/// group order. With equal per-seed row counts the pooled mean is exactly
/// the mean of per-seed means; unequal counts fall back to row weighting.
pub fn pool(per_seed: &[SeedStats]) -> Vec<PooledStats> {
    let mut groups: Vec<(Filter, Chart)> = per_seed.iter().map(|s| (s.filter, s.chart)).collect();
    groups.sort();
    groups.dedup();

    groups
        .into_iter()
        .map(|(filter, chart)| {
            let members: Vec<&SeedStats> = per_seed
                .iter()
                .filter(|s| s.filter == filter && s.chart == chart)
                .collect();
            let att = pool_series(members.iter().map(|s| &s.att));
            let pos = pool_series(members.iter().map(|s| &s.pos));
            PooledStats {
                filter,
                chart,
                att,
                pos,
                seeds: members.len(),
            }
        })
        .collect()
}

fn pool_series<'a>(parts: impl Iterator<Item = &'a SeriesStats> + Clone) -> SeriesStats {
    let equal_counts = {
        let mut counts = parts.clone().map(|p| p.n);
        match counts.next() {
            Some(first) => counts.all(|n| n == first),
            None => true,
        }
    };
    let mut k = 0usize;
    let mut n_total = 0usize;
    let mut mean = 0.0;
    let mut mean_sq = 0.0;
    let mut sup = f64::NEG_INFINITY;
    for p in parts {
        k += 1;
        n_total += p.n;
        sup = sup.max(p.sup);
        if equal_counts {
            mean += p.mean;
            mean_sq += p.mean_sq;
        } else {
            mean += p.mean * p.n as f64;
            mean_sq += p.mean_sq * p.n as f64;
        }
    }
    let denom = if equal_counts {
        k as f64
    } else {
        n_total as f64
    };
    mean /= denom;
    mean_sq /= denom;
    SeriesStats {
        mean,
        std: (mean_sq - mean * mean).max(0.0).sqrt(),
        sup,
        n: n_total,
        mean_sq,
    }
}

/// Plain-text report with a Table-I-shaped block of pooled tracking
/// statistics plus the per-seed breakdown.
pub fn render_report(cfg: &Resolved, per_seed: &[SeedStats], pooled: &[PooledStats]) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}", cfg.name);
    let _ = writeln!(
        out,
        "seeds {} | dt {} s | horizon {} s | window [{}, {}] s",
        cfg.seeds.len(),
        cfg.dt,
        cfg.horizon,
        cfg.window.0,
        cfg.window.1
    );
    let _ = writeln!(
        out,
        "STD convention: population (divide by N); pooled mean = mean of per-seed means"
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "pooled window statistics");
    let _ = writeln!(
        out,
        "{:<12} {:<11} | {:>12} {:>12} | {:>12} {:>12}",
        "filter", "chart", "mean att", "STD att", "mean pos", "STD pos"
    );
    for p in pooled {
        let _ = writeln!(
            out,
            "{:<12} {:<11} | {:>12.6} {:>12.6} | {:>12.6} {:>12.6}",
            p.filter.as_str(),
            p.chart.as_str(),
            p.att.mean,
            p.att.std,
            p.pos.mean,
            p.pos.std
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "per-seed window statistics");
    let _ = writeln!(
        out,
        "{:>5} {:<12} {:<11} | {:>12} {:>12} | {:>12} {:>12} | {:>9} {:>7} {:>7}",
        "seed",
        "filter",
        "chart",
        "mean att",
        "sup att",
        "mean pos",
        "sup pos",
        "att(0)",
        "clamp",
        "sig<0"
    );
    for s in per_seed {
        let _ = writeln!(
            out,
            "{:>5} {:<12} {:<11} | {:>12.6} {:>12.6} | {:>12.6} {:>12.6} | {:>9.4} {:>7} {:>7}",
            s.seed,
            s.filter.as_str(),
            s.chart.as_str(),
            s.att.mean,
            s.att.sup,
            s.pos.mean,
            s.pos.sup,
            s.att_initial,
            s.clamp_steps,
            s.sigma_negative_steps
        );
    }
    out
}

#[derive(Serialize)]
struct SeedStatsJson<'a> {
    seed: u64,
    filter: &'a str,
    chart: &'a str,
    att_mean: f64,
    att_std: f64,
    att_sup: f64,
    pos_mean: f64,
    pos_std: f64,
    pos_sup: f64,
    att_initial: f64,
    rows_in_window: usize,
    clamp_steps: usize,
    sigma_negative_steps: usize,
}

#[derive(Serialize)]
struct PooledStatsJson<'a> {
    filter: &'a str,
    chart: &'a str,
    seeds: usize,
    att_mean: f64,
    att_std: f64,
    att_sup: f64,
    pos_mean: f64,
    pos_std: f64,
    pos_sup: f64,
}

/// Machine-readable statistics mirror of the plain-text report.
pub fn summary_json(
    cfg: &Resolved,
    per_seed: &[SeedStats],
    pooled: &[PooledStats],
) -> serde_json::Value {
    let per_seed_json: Vec<SeedStatsJson> = per_seed
        .iter()
        .map(|s| SeedStatsJson {
            seed: s.seed,
            filter: s.filter.as_str(),
            chart: s.chart.as_str(),
            att_mean: s.att.mean,
            att_std: s.att.std,
            att_sup: s.att.sup,
            pos_mean: s.pos.mean,
            pos_std: s.pos.std,
            pos_sup: s.pos.sup,
            att_initial: s.att_initial,
            rows_in_window: s.att.n,
            clamp_steps: s.clamp_steps,
            sigma_negative_steps: s.sigma_negative_steps,
        })
        .collect();
    let pooled_json: Vec<PooledStatsJson> = pooled
        .iter()
        .map(|p| PooledStatsJson {
            filter: p.filter.as_str(),
            chart: p.chart.as_str(),
            seeds: p.seeds,
            att_mean: p.att.mean,
            att_std: p.att.std,
            att_sup: p.att.sup,
            pos_mean: p.pos.mean,
            pos_std: p.pos.std,
            pos_sup: p.pos.sup,
        })
        .collect();
    serde_json::json!({
        "schema": 1,
        "scenario": cfg.name,
        "dt": cfg.dt,
        "horizon": cfg.horizon,
        "window": [cfg.window.0, cfg.window.1],
        "seeds": cfg.seeds,
        "std_convention": "population",
        "per_seed": per_seed_json,
        "pooled": pooled_json,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats_of(values: &[f64]) -> SeriesStats {
        series(values.iter().copied())
    }

    #[test]
    fn constant_series_has_zero_std() {
        let s = stats_of(&[3.25; 40]);
        assert_eq!(s.mean, 3.25);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.sup, 3.25);
    }

    #[test]
    fn two_point_series_population_convention() {
        let s = stats_of(&[0.0, 2.0]);
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.std, 1.0);
    }

    #[test]
    fn pooled_mean_is_mean_of_seed_means_for_equal_counts() {
        let a = stats_of(&[1.0, 3.0]);
        let b = stats_of(&[5.0, 9.0]);
        let pooled = pool_series([&a, &b].into_iter());
        assert_eq!(pooled.mean, (a.mean + b.mean) / 2.0);
        assert_eq!(pooled.n, 4);
        // population variance over the concatenated rows
        let all = stats_of(&[1.0, 3.0, 5.0, 9.0]);
        assert!((pooled.std - all.std).abs() < 1e-12);
    }

    #[test]
    fn unequal_counts_weight_by_rows() {
        let a = stats_of(&[1.0]);
        let b = stats_of(&[2.0, 4.0, 6.0]);
        let pooled = pool_series([&a, &b].into_iter());
        let all = stats_of(&[1.0, 2.0, 4.0, 6.0]);
        assert!((pooled.mean - all.mean).abs() < 1e-12);
        assert!((pooled.std - all.std).abs() < 1e-12);
    }
}

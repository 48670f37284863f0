//! Executes a resolved scenario: every (seed, filter, chart) case runs in
//! a rayon worker that owns its simulator and estimator, optionally
//! streams its trace to disk, and returns window statistics. Results are
//! sorted by (seed, filter, chart) before aggregation so the output is
//! independent of scheduling.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use liepose::filters::{
    direct_step, direct_step_quat, semi_direct_step, semi_direct_step_quat, FilterError,
    FilterState, QuatFilterState,
};
use liepose::sim::Simulator;
use liepose::wahba::reconstruct_pose;
use liepose::{Pose, Rotation, UnitQuat, Vec3};

use crate::config::{Chart, Filter, Resolved};
use crate::error::HarnessError;
use crate::euler::euler_zyx;
use crate::stats::{seed_stats_from_rows, SeedStats};
use crate::trace::{RunTrace, TraceRow};

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub stats: SeedStats,
    pub trace_path: Option<PathBuf>,
}

/// Runs all configured cases. With `write_dir` set, each worker writes
/// its trace CSV as soon as it is computed; traces are not retained in
/// memory either way.
pub fn run_scenario(
    cfg: &Resolved,
    write_dir: Option<&Path>,
) -> Result<Vec<CaseResult>, HarnessError> {
    if let Some(dir) = write_dir {
        std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    }
    let mut combos = Vec::new();
    for &seed in &cfg.seeds {
        for &filter in &cfg.filters {
            for &chart in &cfg.charts {
                combos.push((seed, filter, chart));
            }
        }
    }
    let mut results = combos
        .par_iter()
        .map(|&(seed, filter, chart)| {
            let trace = run_one(cfg, seed, filter, chart)?;
            let trace_path = match write_dir {
                Some(dir) => Some(trace.write_csv(dir)?),
                None => None,
            };
            Ok(CaseResult {
                stats: seed_stats_from_rows(&trace, cfg.window),
                trace_path,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    results.sort_by_key(|r| (r.stats.seed, r.stats.filter, r.stats.chart));
    Ok(results)
}

enum EstState {
    Mat(FilterState<f64>),
    Quat(QuatFilterState<f64>),
}

impl EstState {
    fn snapshot(&self) -> (Rotation, Vec3, Vec3, Vec3, Vec3) {
        match self {
            EstState::Mat(s) => (s.rot, s.p_hat, s.b_omega_hat, s.b_v_hat, s.sigma_hat),
            EstState::Quat(s) => (
                s.quat.to_rot(),
                s.p_hat,
                s.b_omega_hat,
                s.b_v_hat,
                s.sigma_hat,
            ),
        }
    }
}

/// One full trajectory for one case.
pub fn run_one(
    cfg: &Resolved,
    seed: u64,
    filter: Filter,
    chart: Chart,
) -> Result<RunTrace, HarnessError> {
    let context = |what: &str| {
        format!(
            "seed {seed}, {} {}: {what}",
            filter.as_str(),
            chart.as_str()
        )
    };

    let mut sim = Simulator::new(
        cfg.scene.clone(),
        cfg.noise.clone(),
        cfg.profile.clone(),
        cfg.scaling,
        cfg.dt,
        seed,
    )
    .map_err(|e| HarnessError::Runtime(context(&e.to_string())))?;

    let mut state = match chart {
        Chart::Matrix => EstState::Mat(FilterState::new(cfg.rot0, cfg.p0)),
        Chart::Quaternion => {
            EstState::Quat(QuatFilterState::new(UnitQuat::from_rot(&cfg.rot0), cfg.p0))
        }
    };

    let mut rows = Vec::with_capacity(cfg.steps + 1);
    let mut clamp_steps = 0usize;
    let mut sigma_negative_steps = 0usize;
    rows.push(make_row(sim.truth().pose, sim.time(), &state, false));

    for _ in 0..cfg.steps {
        let frame = sim
            .measure()
            .map_err(|e| HarnessError::Runtime(context(&e.to_string())))?;

        let clamped = match filter {
            Filter::SemiDirect => {
                let pose = reconstruct_pose(&frame)
                    .map_err(|e| HarnessError::Runtime(context(&e.to_string())))?;
                match &state {
                    EstState::Mat(s) => {
                        let stepped = semi_direct_step(s, &frame, &pose, &cfg.gains, cfg.dt)
                            .map_err(|e| filter_error(e, &context))?;
                        state = EstState::Mat(stepped.state);
                        stepped.clamped
                    }
                    EstState::Quat(s) => {
                        let q_y = UnitQuat::from_rot(&pose.pose.rotation);
                        let stepped = semi_direct_step_quat(
                            s,
                            &frame,
                            &q_y,
                            &pose.pose.position,
                            &cfg.gains,
                            cfg.dt,
                        )
                        .map_err(|e| filter_error(e, &context))?;
                        state = EstState::Quat(stepped.state);
                        stepped.clamped
                    }
                }
            }
            Filter::Direct => match &state {
                EstState::Mat(s) => {
                    let stepped = direct_step(s, &frame, &cfg.gains, cfg.dt)
                        .map_err(|e| filter_error(e, &context))?;
                    state = EstState::Mat(stepped.state);
                    stepped.clamped
                }
                EstState::Quat(s) => {
                    let stepped = direct_step_quat(s, &frame, &cfg.gains, cfg.dt)
                        .map_err(|e| filter_error(e, &context))?;
                    state = EstState::Quat(stepped.state);
                    stepped.clamped
                }
            },
        };

        sim.advance()
            .map_err(|e| HarnessError::Runtime(context(&e.to_string())))?;

        let row = make_row(sim.truth().pose, sim.time(), &state, clamped);
        clamp_steps += usize::from(clamped);
        let (_, _, _, _, sigma) = state.snapshot();
        sigma_negative_steps += usize::from(sigma.iter().any(|x| *x < 0.0));
        rows.push(row);
    }

    Ok(RunTrace {
        seed,
        filter,
        chart,
        rows,
        clamp_steps,
        sigma_negative_steps,
    })
}

fn filter_error(e: FilterError, context: &dyn Fn(&str) -> String) -> HarnessError {
    match e {
        FilterError::BadGains(msg) => HarnessError::Precondition(msg),
        other => HarnessError::Runtime(context(&other.to_string())),
    }
}

fn make_row(truth: Pose, t: f64, state: &EstState, clamped: bool) -> TraceRow {
    let (rot_hat, p_hat, b_omega, b_v, sigma) = state.snapshot();
    let te = euler_zyx(&truth.rotation);
    let ee = euler_zyx(&rot_hat);
    let r_tilde = rot_hat.compose(&truth.rotation.transpose());
    let arr = |v: &Vec3| [v.x, v.y, v.z];
    TraceRow {
        t,
        truth_euler: [te.yaw, te.pitch, te.roll],
        truth_p: arr(&truth.position),
        est_euler: [ee.yaw, ee.pitch, ee.roll],
        est_p: arr(&p_hat),
        att_err: r_tilde.dist_identity(),
        pos_err: (p_hat - truth.position).norm(),
        b_omega_hat: arr(&b_omega),
        b_v_hat: arr(&b_v),
        sigma_hat: arr(&sigma),
        clamped,
        gimbal_truth: te.gimbal,
        gimbal_est: ee.gimbal,
    }
}

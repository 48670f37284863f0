//! Long-horizon agreement between the matrix and quaternion forms of each
//! filter. Both variants consume identical measurement streams; the charts
//! differ only in how attitude is stored and renormalized, so trajectories
//! must track each other to well below 1e-6 over the full 25 s run.

mod common;

use common::{bench_initial_estimate, bench_noise, bench_scene, rand_unit, rng};
use liepose::filters::{
    direct_step, direct_step_quat, semi_direct_step, semi_direct_step_quat, FilterState, Gains,
    QuatFilterState,
};
use liepose::sim::{reference_profile, NoiseScaling, Simulator};
use liepose::wahba::reconstruct_pose;
use liepose::{Rotation, UnitQuat, Vec3};
use rand::Rng;

const DT: f64 = 1e-3;
const STEPS: usize = 25_000;
const TOL: f64 = 1e-6;

fn gains() -> Gains<f64> {
    Gains::new(8.0, 1.0, 1.0, 0.1, 0.1, 0.2).unwrap()
}

fn random_initial(seed: u64) -> (Rotation, Vec3) {
    let mut r = rng(seed);
    let angle: f64 = r.random_range(0.0..3.0);
    let axis = rand_unit(&mut r);
    let rot = Rotation::angle_axis(angle, &axis).unwrap();
    let p = Vec3::new(
        r.random_range(-5.0..5.0),
        r.random_range(-5.0..5.0),
        r.random_range(-5.0..5.0),
    );
    (rot, p)
}

fn chart_gap(mat: &FilterState<f64>, quat: &QuatFilterState<f64>) -> (f64, f64) {
    let from_quat = quat.quat.to_rot();
    let dr = mat.rot.matrix() - from_quat.matrix();
    let rot_gap = dr.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let pos_gap = (mat.p_hat - quat.p_hat).norm();
    (rot_gap, pos_gap)
}

/// Runs both charts of one filter against the same measurement stream and
/// returns the worst attitude-entry and position gaps seen over the run.
fn run_pair(seed: u64, direct: bool) -> (f64, f64) {
    let mut sim = Simulator::new(
        bench_scene(),
        bench_noise(),
        reference_profile(),
        NoiseScaling::PerSample,
        DT,
        seed,
    )
    .unwrap();

    let (rot0, p0) = if seed % 2 == 0 {
        bench_initial_estimate()
    } else {
        random_initial(7 * seed + 1)
    };
    let mut mat = FilterState::new(rot0, p0);
    let mut quat = QuatFilterState::new(UnitQuat::from_rot(&mat.rot), p0);
    let g = gains();

    let mut worst_rot = 0.0_f64;
    let mut worst_pos = 0.0_f64;
    for _ in 0..STEPS {
        let frame = sim.measure().unwrap();

        if direct {
            mat = direct_step(&mat, &frame, &g, DT).unwrap().state;
            quat = direct_step_quat(&quat, &frame, &g, DT).unwrap().state;
        } else {
            let pose = reconstruct_pose(&frame).unwrap();
            let q_y = UnitQuat::from_rot(&pose.pose.rotation);
            mat = semi_direct_step(&mat, &frame, &pose, &g, DT).unwrap().state;
            quat = semi_direct_step_quat(&quat, &frame, &q_y, &pose.pose.position, &g, DT)
                .unwrap()
                .state;
        }

        let (rg, pg) = chart_gap(&mat, &quat);
        worst_rot = worst_rot.max(rg);
        worst_pos = worst_pos.max(pg);
        sim.advance().unwrap();
    }
    (worst_rot, worst_pos)
}

#[test]
fn semi_direct_charts_agree_over_full_horizon() {
    for ic in 0..10u64 {
        let (rot_gap, pos_gap) = run_pair(100 + ic, false);
        assert!(
            rot_gap <= TOL && pos_gap <= TOL,
            "ic {ic}: rot gap {rot_gap:.3e}, pos gap {pos_gap:.3e}"
        );
    }
}

#[test]
fn direct_charts_agree_over_full_horizon() {
    for ic in 0..10u64 {
        let (rot_gap, pos_gap) = run_pair(100 + ic, true);
        assert!(
            rot_gap <= TOL && pos_gap <= TOL,
            "ic {ic}: rot gap {rot_gap:.3e}, pos gap {pos_gap:.3e}"
        );
    }
}

//! Batch pose reconstruction from noise-free direction and landmark
//! measurements must recover the true pose to numerical precision.

mod common;

use common::{rand_rotation, rand_unit, rand_vec, rng};
use liepose::sim::MeasurementFrame;
use liepose::wahba::{reconstruct_pose, solve_wahba, WahbaError};
use liepose::{Pose, Vec3};
use rand::Rng;

/// Noise-free frame observed from `pose`: three random directions with
/// weights summing to three, plus two landmarks.
fn exact_frame(pose: &Pose, rng: &mut rand_chacha::ChaCha12Rng) -> MeasurementFrame<f64> {
    let inertial: Vec<Vec3> = (0..3).map(|_| rand_unit(rng)).collect();
    let mut w: Vec<f64> = (0..3).map(|_| rng.random_range(0.2..2.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x *= 3.0 / s);
    let body: Vec<Vec3> = inertial
        .iter()
        .map(|v| pose.rotation.transpose().act(v))
        .collect();
    let landmarks: Vec<Vec3> = (0..2).map(|_| rand_vec(rng, 5.0)).collect();
    let body_landmarks: Vec<Vec3> = landmarks
        .iter()
        .map(|p| pose.rotation.transpose().act(&(p - pose.position)))
        .collect();
    MeasurementFrame {
        t: 0.0,
        omega_m: Vec3::zeros(),
        v_m: Vec3::zeros(),
        body_vectors: body,
        inertial_vectors: inertial,
        weights_vectors: w,
        body_landmarks,
        inertial_landmarks: landmarks,
        weights_landmarks: vec![1.0, 0.5],
    }
}

#[test]
fn recovers_random_poses_exactly() {
    let mut rng = rng(31);
    for _ in 0..200 {
        let pose = Pose {
            rotation: rand_rotation(&mut rng),
            position: rand_vec(&mut rng, 10.0),
        };
        let frame = exact_frame(&pose, &mut rng);
        let rec = reconstruct_pose(&frame).unwrap();
        let r_tilde = rec.pose.rotation.compose(&pose.rotation.transpose());
        assert!(r_tilde.dist_identity() <= 1e-12);
        assert!((rec.pose.position - pose.position).norm() <= 1e-10);
        assert!(rec.conditioning > 0.0);
    }
}

#[test]
fn invariant_under_measurement_order() {
    let mut rng = rng(32);
    let pose = Pose {
        rotation: rand_rotation(&mut rng),
        position: rand_vec(&mut rng, 10.0),
    };
    let frame = exact_frame(&pose, &mut rng);
    let mut permuted = frame.clone();
    permuted.body_vectors.swap(0, 2);
    permuted.inertial_vectors.swap(0, 2);
    permuted.weights_vectors.swap(0, 2);
    permuted.body_landmarks.swap(0, 1);
    permuted.inertial_landmarks.swap(0, 1);
    permuted.weights_landmarks.swap(0, 1);
    let a = reconstruct_pose(&frame).unwrap();
    let b = reconstruct_pose(&permuted).unwrap();
    assert!(common::max_abs(&(a.pose.rotation.matrix() - b.pose.rotation.matrix())) < 1e-12);
    assert!((a.pose.position - b.pose.position).norm() < 1e-12);
}

#[test]
fn rejects_coplanar_directions() {
    // two anti-parallel pairs span only one direction
    let v = Vec3::x();
    let body = vec![v, -v];
    let inertial = vec![v, -v];
    let weights = vec![1.5, 1.5];
    assert!(matches!(
        solve_wahba(&body, &inertial, &weights),
        Err(WahbaError::RankDeficient)
    ));
}

#[test]
fn landmark_bias_shifts_position_by_rotated_bias() {
    // a common additive bias b on body-frame landmarks moves the position
    // estimate by exactly -R_y b while leaving the attitude untouched
    let mut rng = rng(33);
    let pose = Pose {
        rotation: rand_rotation(&mut rng),
        position: rand_vec(&mut rng, 10.0),
    };
    let mut frame = exact_frame(&pose, &mut rng);
    let bias = Vec3::new(0.03, 0.02, -0.02);
    for p in frame.body_landmarks.iter_mut() {
        *p += bias;
    }
    let rec = reconstruct_pose(&frame).unwrap();
    let shift = rec.pose.position - pose.position;
    let expected = -rec.pose.rotation.act(&bias);
    assert!((shift - expected).norm() < 1e-10);
}

#[test]
fn conditioning_reports_smallest_singular_value() {
    // axis triad with weights (2, 0.5, 0.5): profile matrix is diagonal,
    // so the conditioning number is the smallest weight
    let body = vec![Vec3::x(), Vec3::y(), Vec3::z()];
    let inertial = body.clone();
    let weights = vec![2.0, 0.5, 0.5];
    let (r, cond) = solve_wahba(&body, &inertial, &weights).unwrap();
    assert!(r.dist_identity() < 1e-15);
    assert!((cond - 0.5).abs() < 1e-12);
}

//! Shared sampling helpers and the benchmark-scenario constants for the
//! integration tests.
#![allow(dead_code)]

use liepose::sim::{NoiseModel, Scene};
use liepose::{Mat3, Rotation, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn rand_unit(rng: &mut ChaCha12Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

pub fn rand_vec(rng: &mut ChaCha12Rng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

pub fn rand_mat(rng: &mut ChaCha12Rng, scale: f64) -> Mat3 {
    Mat3::from_fn(|_, _| rng.random_range(-scale..scale))
}

/// Rotation by a uniform angle in `[0, pi]` about a uniform axis.
pub fn rand_rotation(rng: &mut ChaCha12Rng) -> Rotation {
    let angle = rng.random_range(0.0..std::f64::consts::PI);
    Rotation::angle_axis(angle, &rand_unit(rng)).unwrap()
}

/// Symmetric positive-definite matrix with eigenvalues in `[lo, hi]`,
/// optionally rescaled so its trace equals `trace`.
pub fn rand_spd(rng: &mut ChaCha12Rng, lo: f64, hi: f64, trace: Option<f64>) -> Mat3 {
    let q = rand_rotation(rng);
    let mut l = Vec3::new(
        rng.random_range(lo..hi),
        rng.random_range(lo..hi),
        rng.random_range(lo..hi),
    );
    if let Some(t) = trace {
        l *= t / l.sum();
    }
    q.matrix() * Mat3::from_diagonal(&l) * q.matrix().transpose()
}

pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// The benchmark scene: two reference directions with cross-product
/// augmentation, one landmark.
pub fn bench_scene() -> Scene<f64> {
    Scene {
        inertial_vectors: vec![
            Vec3::new(1.0, -1.0, 1.0) / 3.0_f64.sqrt(),
            Vec3::new(0.0, 0.0, 1.0),
        ],
        augment: true,
        weights_vectors: vec![1.0, 1.0, 1.0],
        landmarks: vec![Vec3::new(0.5, 2.0_f64.sqrt(), 1.0)],
        weights_landmarks: vec![1.0],
    }
}

/// The benchmark noise model: constant rate and velocity biases with
/// white Gaussian noise on every channel.
pub fn bench_noise() -> NoiseModel<f64> {
    NoiseModel {
        b_omega: Vec3::new(0.1, -0.1, 0.1),
        b_v: Vec3::new(0.2, 0.5, 0.1),
        std_omega: Vec3::new(0.15, 0.15, 0.15),
        std_v: Vec3::new(0.15, 0.15, 0.15),
        vector_bias: vec![Vec3::new(-0.1, 0.1, 0.05), Vec3::new(0.0, 0.0, 0.1)],
        vector_std: 0.1,
        landmark_bias: vec![Vec3::new(0.03, 0.02, -0.02)],
        landmark_std: 0.1,
    }
}

/// The benchmark initial estimate: a 170 degree attitude offset and a
/// displaced position.
pub fn bench_initial_estimate() -> (Rotation, Vec3) {
    let axis = Vec3::new(3.0, 10.0, 8.0) / 173.0_f64.sqrt();
    let rot = Rotation::angle_axis(170.0 * std::f64::consts::PI / 180.0, &axis).unwrap();
    (rot, Vec3::new(4.0, -3.0, 5.0))
}

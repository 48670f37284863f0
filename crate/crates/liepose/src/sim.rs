//! Deterministic rigid-body truth and seeded measurement synthesis.
//!
//! The truth pose follows the noise-free kinematics driven by a velocity
//! profile, integrated with fixed-step RK4 and reprojected onto SO(3)
//! every step; noise enters only through the measurements. Corruption is
//! a constant bias plus i.i.d. Gaussian noise per sample, drawn from
//! three independent substreams of a counter-based generator (group
//! velocities, direction vectors, landmarks), so enabling one noise
//! source never shifts the draws of another.
//!
//! Gaussian draws are always taken and then scaled by the configured
//! standard deviation; a zero std therefore consumes the same stream
//! positions as a nonzero one, keeping runs comparable across noise
//! settings.

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{AlgebraError, Pose, Rotation};
use crate::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("scene is invalid: {0}")]
    InvalidScene(String),
    #[error("noise model is invalid: {0}")]
    InvalidNoise(String),
    #[error("time step must be positive and finite")]
    BadTimeStep,
    #[error("vector {index} is degenerate after corruption (norm {norm:.3e})")]
    DegenerateVector { index: usize, norm: f64 },
    #[error("weighted center needs a nonzero weight sum")]
    ZeroWeightSum,
    #[error("truth integration left the rotation manifold: {0}")]
    Projection(#[from] AlgebraError),
}

/// One sinusoidal velocity component, `amp * sin(freq * t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoid<T: Real> {
    pub amp: T,
    pub freq: T,
    pub phase: T,
}

impl<T: Real> Sinusoid<T> {
    pub fn eval(&self, t: T) -> T {
        self.amp * (self.freq * t + self.phase).sin()
    }
}

/// Angular and translational velocity of the truth body as a function of
/// time.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityProfile<T: Real> {
    Zero,
    Constant {
        omega: Vector3<T>,
        v: Vector3<T>,
    },
    /// Independent sinusoids per axis, angular first.
    Sinusoids {
        omega: [Sinusoid<T>; 3],
        v: [Sinusoid<T>; 3],
    },
}

impl<T: Real> VelocityProfile<T> {
    /// `(omega, v)` at time `t`.
    pub fn eval(&self, t: T) -> (Vector3<T>, Vector3<T>) {
        match self {
            VelocityProfile::Zero => (Vector3::zeros(), Vector3::zeros()),
            VelocityProfile::Constant { omega, v } => (*omega, *v),
            VelocityProfile::Sinusoids { omega, v } => (
                Vector3::new(omega[0].eval(t), omega[1].eval(t), omega[2].eval(t)),
                Vector3::new(v[0].eval(t), v[1].eval(t), v[2].eval(t)),
            ),
        }
    }
}

/// The bundled benchmark trajectory: smooth sinusoidal rates exciting all
/// six degrees of freedom.
pub fn reference_profile<T: Real>() -> VelocityProfile<T> {
    let s = |amp: f64, freq: f64, phase: f64| Sinusoid {
        amp: T::of(amp),
        freq: T::of(freq),
        phase: T::of(phase),
    };
    let pi = T::PI().to_f64().unwrap();
    VelocityProfile::Sinusoids {
        omega: [s(1.0, 0.5, 0.0), s(0.7, 0.25, pi), s(0.5, 0.4, pi / 3.0)],
        v: [
            s(1.0, 0.2, 0.0),
            s(0.6, 0.5, pi / 2.0),
            s(1.0, 0.4, pi / 4.0),
        ],
    }
}

/// Truth velocity of the bundled benchmark trajectory at time `t`.
pub fn truth_velocity<T: Real>(t: T) -> (Vector3<T>, Vector3<T>) {
    reference_profile().eval(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthState<T: Real> {
    pub pose: Pose<T>,
    pub t: T,
}

impl<T: Real> TruthState<T> {
    pub fn initial() -> Self {
        TruthState {
            pose: Pose::identity(),
            t: T::zero(),
        }
    }
}

/// One RK4 step of the truth kinematics, with the rotation reprojected
/// onto SO(3) afterwards.
pub fn truth_step<T: Real>(
    profile: &VelocityProfile<T>,
    state: &TruthState<T>,
    dt: T,
) -> Result<TruthState<T>, SimError> {
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(SimError::BadTimeStep);
    }
    let f = |t: T, r: &Matrix3<T>| -> (Matrix3<T>, Vector3<T>) {
        let (omega, v) = profile.eval(t);
        (r * crate::algebra::skew(&omega), r * v)
    };
    let half = T::of(0.5);
    let r0 = *state.pose.rotation.matrix();
    let p0 = state.pose.position;
    let t0 = state.t;

    let (kr1, kp1) = f(t0, &r0);
    let (kr2, kp2) = f(t0 + dt * half, &(r0 + kr1 * (dt * half)));
    let (kr3, kp3) = f(t0 + dt * half, &(r0 + kr2 * (dt * half)));
    let (kr4, kp4) = f(t0 + dt, &(r0 + kr3 * dt));

    let sixth = dt / T::of(6.0);
    let two = T::of(2.0);
    let r1 = r0 + (kr1 + kr2 * two + kr3 * two + kr4) * sixth;
    let p1 = p0 + (kp1 + kp2 * two + kp3 * two + kp4) * sixth;
    Ok(TruthState {
        pose: Pose::new(Rotation::project(&r1)?, p1),
        t: t0 + dt,
    })
}

/// Reference directions and landmark positions observed by the body.
///
/// `inertial_vectors` holds the raw (not necessarily unit) reference
/// directions; with `augment` set, the cross product of the two raw
/// vectors is appended on both frames before normalization, raising the
/// usable set to rank 3. `weights_vectors` applies to the augmented set.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T: Real> {
    pub inertial_vectors: Vec<Vector3<T>>,
    pub augment: bool,
    pub weights_vectors: Vec<T>,
    pub landmarks: Vec<Vector3<T>>,
    pub weights_landmarks: Vec<T>,
}

impl<T: Real> Scene<T> {
    /// Number of direction vectors after optional augmentation.
    pub fn n_vectors(&self) -> usize {
        self.inertial_vectors.len() + usize::from(self.augment)
    }

    /// Structural checks: length agreement, finite positive weights, the
    /// vector weights summing to 3 (within a precision-scaled tolerance),
    /// and a nonzero landmark weight sum when landmarks are present.
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidScene(msg));
        if self.augment && self.inertial_vectors.len() != 2 {
            return bad(format!(
                "cross-product augmentation needs exactly 2 raw vectors, got {}",
                self.inertial_vectors.len()
            ));
        }
        if self.weights_vectors.len() != self.n_vectors() {
            return bad(format!(
                "{} vector weights for {} vectors (after augmentation)",
                self.weights_vectors.len(),
                self.n_vectors()
            ));
        }
        if self.weights_landmarks.len() != self.landmarks.len() {
            return bad(format!(
                "{} landmark weights for {} landmarks",
                self.weights_landmarks.len(),
                self.landmarks.len()
            ));
        }
        for (what, ws) in [
            ("vector", &self.weights_vectors),
            ("landmark", &self.weights_landmarks),
        ] {
            if ws.iter().any(|w| !(w.is_finite() && *w > T::zero())) {
                return bad(format!("{what} weights must be finite and positive"));
            }
        }
        if self
            .inertial_vectors
            .iter()
            .chain(self.landmarks.iter())
            .any(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return bad("scene vectors must be finite".to_string());
        }
        let sum: T = self.weights_vectors.iter().fold(T::zero(), |a, &w| a + w);
        if (sum - T::of(3.0)).abs() > T::GRAM_TOL {
            return bad(format!(
                "vector weights must sum to 3, got {}",
                sum.to_f64().unwrap_or(f64::NAN)
            ));
        }
        if !self.landmarks.is_empty() {
            let lsum: T = self.weights_landmarks.iter().fold(T::zero(), |a, &w| a + w);
            if lsum <= T::zero() {
                return bad("landmark weights must have a positive sum".to_string());
            }
        }
        Ok(())
    }

    /// Raw inertial vector set with the augmentation cross product
    /// appended.
    pub fn raw_augmented_inertial(&self) -> Vec<Vector3<T>> {
        let mut out = self.inertial_vectors.clone();
        if self.augment {
            let cross = out[0].cross(&out[1]);
            out.push(cross);
        }
        out
    }

    /// Augmented and normalized inertial directions.
    pub fn normalized_inertial(&self) -> Result<Vec<Vector3<T>>, SimError> {
        normalize_all(&self.raw_augmented_inertial())
    }
}

fn normalize_all<T: Real>(raw: &[Vector3<T>]) -> Result<Vec<Vector3<T>>, SimError> {
    raw.iter()
        .enumerate()
        .map(|(index, v)| {
            let norm = v.norm();
            if norm < T::GRAM_TOL {
                Err(SimError::DegenerateVector {
                    index,
                    norm: norm.to_f64().unwrap_or(f64::NAN),
                })
            } else {
                Ok(v / norm)
            }
        })
        .collect()
}

/// Diagnosis of whether the scene supports full pose observability: the
/// normalized inertial vector set must have rank 3 and at least one
/// landmark must be available.
#[derive(Debug, Clone, PartialEq)]
pub struct Assumption1Report {
    pub n_vectors: usize,
    pub rank: usize,
    /// Smallest singular value of the stacked normalized vector set.
    pub smallest_singular_value: f64,
    pub n_landmarks: usize,
    pub weight_sum_vectors: f64,
    pub weight_sum_landmarks: f64,
    pub satisfied: bool,
}

pub fn check_assumption1<T: Real>(scene: &Scene<T>) -> Result<Assumption1Report, SimError> {
    scene.validate()?;
    let normalized = scene.normalized_inertial()?;
    // Gram matrix of the set; its eigenvalues are the squared singular
    // values of the stacked vectors.
    let mut gram = Matrix3::<T>::zeros();
    for v in &normalized {
        gram += v * v.transpose();
    }
    let eig = gram.symmetric_eigen();
    let mut evs: Vec<T> = eig.eigenvalues.iter().copied().collect();
    evs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let tol = T::of(1e-9) * evs[0].max(T::one());
    let rank = evs.iter().filter(|&&e| e > tol).count();
    let smallest = evs[2].max(T::zero()).sqrt().to_f64().unwrap_or(f64::NAN);
    let sum = |ws: &[T]| {
        ws.iter()
            .fold(T::zero(), |a, &w| a + w)
            .to_f64()
            .unwrap_or(f64::NAN)
    };
    Ok(Assumption1Report {
        n_vectors: normalized.len(),
        rank,
        smallest_singular_value: smallest,
        n_landmarks: scene.landmarks.len(),
        weight_sum_vectors: sum(&scene.weights_vectors),
        weight_sum_landmarks: sum(&scene.weights_landmarks),
        satisfied: rank == 3 && !scene.landmarks.is_empty(),
    })
}

/// Constant biases and per-sample noise standard deviations for every
/// measured quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel<T: Real> {
    pub b_omega: Vector3<T>,
    pub b_v: Vector3<T>,
    pub std_omega: Vector3<T>,
    pub std_v: Vector3<T>,
    /// One bias per raw (pre-augmentation) direction vector.
    pub vector_bias: Vec<Vector3<T>>,
    pub vector_std: T,
    pub landmark_bias: Vec<Vector3<T>>,
    pub landmark_std: T,
}

impl<T: Real> NoiseModel<T> {
    /// All-zero model for the given scene shape.
    pub fn zero(n_raw_vectors: usize, n_landmarks: usize) -> Self {
        NoiseModel {
            b_omega: Vector3::zeros(),
            b_v: Vector3::zeros(),
            std_omega: Vector3::zeros(),
            std_v: Vector3::zeros(),
            vector_bias: vec![Vector3::zeros(); n_raw_vectors],
            vector_std: T::zero(),
            landmark_bias: vec![Vector3::zeros(); n_landmarks],
            landmark_std: T::zero(),
        }
    }

    pub fn validate(&self, scene: &Scene<T>) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidNoise(msg));
        if self.vector_bias.len() != scene.inertial_vectors.len() {
            return bad(format!(
                "{} vector biases for {} raw vectors",
                self.vector_bias.len(),
                scene.inertial_vectors.len()
            ));
        }
        if self.landmark_bias.len() != scene.landmarks.len() {
            return bad(format!(
                "{} landmark biases for {} landmarks",
                self.landmark_bias.len(),
                scene.landmarks.len()
            ));
        }
        let all_stds = self
            .std_omega
            .iter()
            .chain(self.std_v.iter())
            .copied()
            .chain([self.vector_std, self.landmark_std]);
        for s in all_stds {
            if !(s.is_finite() && s >= T::zero()) {
                return bad("standard deviations must be finite and nonnegative".to_string());
            }
        }
        Ok(())
    }
}

/// How configured standard deviations map to per-sample draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseScaling {
    /// Stds are already per-sample values at the simulation rate.
    PerSample,
    /// Stds are continuous-time noise densities; the per-sample value is
    /// `std / sqrt(dt)`.
    SqrtDt,
}

impl NoiseScaling {
    pub fn factor<T: Real>(self, dt: f64) -> T {
        match self {
            NoiseScaling::PerSample => T::one(),
            NoiseScaling::SqrtDt => T::of(1.0 / dt.sqrt()),
        }
    }
}

/// Everything the estimators see at one sampling instant.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFrame<T: Real> {
    pub t: T,
    pub omega_m: Vector3<T>,
    pub v_m: Vector3<T>,
    /// Normalized corrupted body-frame directions (augmented).
    pub body_vectors: Vec<Vector3<T>>,
    /// Normalized inertial reference directions (augmented).
    pub inertial_vectors: Vec<Vector3<T>>,
    pub weights_vectors: Vec<T>,
    /// Corrupted body-frame landmark positions (not normalized).
    pub body_landmarks: Vec<Vector3<T>>,
    pub inertial_landmarks: Vec<Vector3<T>>,
    pub weights_landmarks: Vec<T>,
}

/// `sum(s_i p_i) / sum(s_i)`.
pub fn weighted_center<T: Real>(
    points: &[Vector3<T>],
    weights: &[T],
) -> Result<Vector3<T>, SimError> {
    let wsum = weights.iter().fold(T::zero(), |a, &w| a + w);
    if wsum == T::zero() || points.is_empty() {
        return Err(SimError::ZeroWeightSum);
    }
    let acc = points
        .iter()
        .zip(weights)
        .fold(Vector3::zeros(), |a: Vector3<T>, (p, &w)| a + p * w);
    Ok(acc / wsum)
}

fn draw3(rng: &mut ChaCha12Rng) -> Vector3<f64> {
    let x: f64 = StandardNormal.sample(rng);
    let y: f64 = StandardNormal.sample(rng);
    let z: f64 = StandardNormal.sample(rng);
    Vector3::new(x, y, z)
}

/// Biased, noisy group-velocity measurements.
pub fn synth_velocity<T: Real>(
    omega_true: &Vector3<T>,
    v_true: &Vector3<T>,
    model: &NoiseModel<T>,
    scale: T,
    rng: &mut ChaCha12Rng,
) -> (Vector3<T>, Vector3<T>) {
    let n_omega = draw3(rng);
    let n_v = draw3(rng);
    let mut omega_m = *omega_true + model.b_omega;
    let mut v_m = *v_true + model.b_v;
    for k in 0..3 {
        omega_m[k] += model.std_omega[k] * scale * T::of(n_omega[k]);
        v_m[k] += model.std_v[k] * scale * T::of(n_v[k]);
    }
    (omega_m, v_m)
}

/// Corrupted body-frame direction vectors and their inertial references,
/// both augmented (on the raw values) and normalized.
pub fn synth_vectors<T: Real>(
    rot_true: &Rotation<T>,
    scene: &Scene<T>,
    model: &NoiseModel<T>,
    scale: T,
    rng: &mut ChaCha12Rng,
) -> Result<(Vec<Vector3<T>>, Vec<Vector3<T>>), SimError> {
    let rt = rot_true.transpose();
    let mut raw_body: Vec<Vector3<T>> = scene
        .inertial_vectors
        .iter()
        .zip(&model.vector_bias)
        .map(|(v_i, bias)| {
            let n = draw3(rng);
            let mut v = rt.act(v_i) + bias;
            for k in 0..3 {
                v[k] += model.vector_std * scale * T::of(n[k]);
            }
            v
        })
        .collect();
    if scene.augment {
        // the derived third vector carries no corruption of its own; it
        // inherits the noise of its two factors
        let cross = raw_body[0].cross(&raw_body[1]);
        raw_body.push(cross);
    }
    let body = normalize_all(&raw_body)?;
    let inertial = scene.normalized_inertial()?;
    Ok((body, inertial))
}

/// Corrupted body-frame landmark positions.
pub fn synth_landmarks<T: Real>(
    pose_true: &Pose<T>,
    scene: &Scene<T>,
    model: &NoiseModel<T>,
    scale: T,
    rng: &mut ChaCha12Rng,
) -> Vec<Vector3<T>> {
    let rt = pose_true.rotation.transpose();
    scene
        .landmarks
        .iter()
        .zip(&model.landmark_bias)
        .map(|(p_i, bias)| {
            let n = draw3(rng);
            let mut v = rt.act(&(p_i - pose_true.position)) + bias;
            for k in 0..3 {
                v[k] += model.landmark_std * scale * T::of(n[k]);
            }
            v
        })
        .collect()
}

const STREAM_VELOCITY: u64 = 0;
const STREAM_VECTORS: u64 = 1;
const STREAM_LANDMARKS: u64 = 2;

/// Owns the truth trajectory and the noise streams of one simulation.
///
/// Time is tracked as an integer step count so `t = k * dt` is exact and
/// identical runs stay bit-for-bit reproducible.
pub struct Simulator<T: Real> {
    profile: VelocityProfile<T>,
    scene: Scene<T>,
    noise: NoiseModel<T>,
    dt: f64,
    scale: T,
    step: u64,
    pose: Pose<T>,
    inertial_normalized: Vec<Vector3<T>>,
    rng_velocity: ChaCha12Rng,
    rng_vectors: ChaCha12Rng,
    rng_landmarks: ChaCha12Rng,
}

impl<T: Real> Simulator<T> {
    pub fn new(
        scene: Scene<T>,
        noise: NoiseModel<T>,
        profile: VelocityProfile<T>,
        scaling: NoiseScaling,
        dt: f64,
        seed: u64,
    ) -> Result<Self, SimError> {
        scene.validate()?;
        noise.validate(&scene)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::BadTimeStep);
        }
        let substream = |stream: u64| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            rng
        };
        let inertial_normalized = scene.normalized_inertial()?;
        Ok(Simulator {
            profile,
            noise,
            dt,
            scale: scaling.factor(dt),
            step: 0,
            pose: Pose::identity(),
            inertial_normalized,
            rng_velocity: substream(STREAM_VELOCITY),
            rng_vectors: substream(STREAM_VECTORS),
            rng_landmarks: substream(STREAM_LANDMARKS),
            scene,
        })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn truth(&self) -> TruthState<T> {
        TruthState {
            pose: self.pose,
            t: T::of(self.time()),
        }
    }

    pub fn scene(&self) -> &Scene<T> {
        &self.scene
    }

    /// Draws one measurement frame at the current instant. Call exactly
    /// once per step to keep the stream layout fixed.
    pub fn measure(&mut self) -> Result<MeasurementFrame<T>, SimError> {
        let t = T::of(self.time());
        let (omega_true, v_true) = self.profile.eval(t);
        let (omega_m, v_m) = synth_velocity(
            &omega_true,
            &v_true,
            &self.noise,
            self.scale,
            &mut self.rng_velocity,
        );
        let (body_vectors, _) = synth_vectors(
            &self.pose.rotation,
            &self.scene,
            &self.noise,
            self.scale,
            &mut self.rng_vectors,
        )?;
        let body_landmarks = synth_landmarks(
            &self.pose,
            &self.scene,
            &self.noise,
            self.scale,
            &mut self.rng_landmarks,
        );
        Ok(MeasurementFrame {
            t,
            omega_m,
            v_m,
            body_vectors,
            inertial_vectors: self.inertial_normalized.clone(),
            weights_vectors: self.scene.weights_vectors.clone(),
            body_landmarks,
            inertial_landmarks: self.scene.landmarks.clone(),
            weights_landmarks: self.scene.weights_landmarks.clone(),
        })
    }

    /// Advances the truth by one RK4 step.
    pub fn advance(&mut self) -> Result<(), SimError> {
        let state = self.truth();
        let next = truth_step(&self.profile, &state, T::of(self.dt))?;
        self.pose = next.pose;
        self.step += 1;
        Ok(())
    }
}

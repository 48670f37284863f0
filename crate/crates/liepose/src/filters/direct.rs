//! Direct estimator: driven by the vector and landmark measurements
//! themselves, without pose reconstruction.

use nalgebra::{Matrix3, Vector3};

use super::{
    clamp_denom, finite3, ErrorSnapshot, FilterError, FilterState, Gains, QuatFilterState, Stepped,
};
use crate::algebra::{skew, so3_exp, Rotation};
use crate::quat::UnitQuat;
use crate::sim::MeasurementFrame;
use crate::Real;

/// Inertial-side constants of one frame's measurement set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectMatrices<T: Real> {
    /// `M_R = sum(s_i a_i a_i^T)` over the normalized inertial directions.
    pub m_r: Matrix3<T>,
    pub m_r_inv: Matrix3<T>,
    /// `m_v = sum(s_j p_j^I)` over the inertial landmarks.
    pub m_v: Vector3<T>,
    /// `m_c = sum(s_j)`, the landmark weight sum.
    pub m_c: T,
    /// Smallest singular value of `Tr(M_R) I - M_R`; positive exactly
    /// when the direction set has rank 3.
    pub lambda1: T,
}

/// Builds the inertial-side constants, rejecting rank-deficient direction
/// sets.
pub fn build_direct_matrices<T: Real>(
    frame: &MeasurementFrame<T>,
) -> Result<DirectMatrices<T>, FilterError> {
    let mut m_r = Matrix3::<T>::zeros();
    for (a, &s) in frame.inertial_vectors.iter().zip(&frame.weights_vectors) {
        m_r += a * a.transpose() * s;
    }
    let eig = m_r.symmetric_eigen();
    let mut evs: Vec<T> = eig.eigenvalues.iter().copied().collect();
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if !(evs[0] > evs[2] * T::of(1e-9)) {
        return Err(FilterError::RankDeficient);
    }
    // eigenvalues of Tr(M_R) I - M_R are pair sums of those of M_R, so
    // its smallest singular value is the sum of the two smallest
    let lambda1 = evs[0] + evs[1];
    let m_r_inv = m_r.try_inverse().ok_or(FilterError::RankDeficient)?;
    let mut m_v = Vector3::zeros();
    let mut m_c = T::zero();
    for (p, &s) in frame
        .inertial_landmarks
        .iter()
        .zip(&frame.weights_landmarks)
    {
        m_v += p * s;
        m_c += s;
    }
    if !(m_c > T::zero()) {
        return Err(FilterError::RankDeficient);
    }
    Ok(DirectMatrices {
        m_r,
        m_r_inv,
        m_v,
        m_c,
        lambda1,
    })
}

struct DirectTerms<T: Real> {
    snapshot: ErrorSnapshot<T>,
    /// `R_hat^T upsilon`, the body-frame correction direction.
    y_ups: Vector3<T>,
    lambda1: T,
}

/// Shared evaluation of the measurement-space error terms on the matrix
/// chart.
fn direct_terms<T: Real>(
    state: &FilterState<T>,
    frame: &MeasurementFrame<T>,
    mats: &DirectMatrices<T>,
) -> Result<DirectTerms<T>, FilterError> {
    let r_hat = state.rot.matrix();
    let rt = r_hat.transpose();
    let half = T::of(0.5);
    let quarter = T::of(0.25);

    let mut inner = Vector3::zeros(); // sum(s_i/2 (a_hat_i x b_i))
    let mut m1 = Matrix3::<T>::zeros(); // sum(s_i b_i a_i^T)
    let mut m2 = Matrix3::<T>::zeros(); // sum(s_i a_hat_i a_i^T)
    let mut e_r = T::zero();
    for ((a, b), &s) in frame
        .inertial_vectors
        .iter()
        .zip(&frame.body_vectors)
        .zip(&frame.weights_vectors)
    {
        let a_hat = rt * a;
        inner += a_hat.cross(b) * (s * half);
        m1 += b * a.transpose() * s;
        m2 += a_hat * a.transpose() * s;
        e_r += s * (T::one() - a_hat.dot(b));
    }
    e_r *= quarter;
    let upsilon = r_hat * inner;

    let m2_inv = m2.try_inverse().ok_or(FilterError::SingularInnerMatrix)?;
    let trace_term = (m1 * m2_inv).trace();

    let mut k_v = Vector3::zeros();
    for (p, &s) in frame.body_landmarks.iter().zip(&frame.weights_landmarks) {
        k_v += p * s;
    }
    let rm = r_hat * m1; // measurement-space R_tilde M_R
    let e_p = state.p_hat + (r_hat * k_v - rm * mats.m_r_inv * mats.m_v) / mats.m_c;

    Ok(DirectTerms {
        snapshot: ErrorSnapshot {
            e_r,
            e_p,
            upsilon,
            trace_term,
        },
        y_ups: inner,
        lambda1: mats.lambda1,
    })
}

/// Measurement-space error terms of the direct estimator.
///
/// All quantities are sums over the measured vector pairs; in the
/// noise-free case they reduce to the corresponding attitude-error
/// expressions against the truth.
pub fn direct_errors<T: Real>(
    state: &FilterState<T>,
    frame: &MeasurementFrame<T>,
) -> Result<ErrorSnapshot<T>, FilterError> {
    let mats = build_direct_matrices(frame)?;
    Ok(direct_terms(state, frame, &mats)?.snapshot)
}

/// One step of the direct estimator on the matrix chart.
///
/// Fails with [`FilterError::Diverged`] when the stepped state stops
/// being finite; see [`semi_direct_step`](super::semi_direct_step) for
/// the mechanism.
pub fn direct_step<T: Real>(
    state: &FilterState<T>,
    frame: &MeasurementFrame<T>,
    gains: &Gains<T>,
    dt: T,
) -> Result<Stepped<FilterState<T>>, FilterError> {
    let mats = build_direct_matrices(frame)?;
    let terms = direct_terms(state, frame, &mats)?;
    if !(gains.k_w > T::of(3.0 / 8.0) * terms.lambda1) {
        return Err(FilterError::BadGains(format!(
            "k_w must exceed (3/8) lambda1 = {}",
            (terms.lambda1 * T::of(3.0 / 8.0))
                .to_f64()
                .unwrap_or(f64::NAN)
        )));
    }
    let one = T::one();
    let err = &terms.snapshot;
    let (den, clamped) = clamp_denom(one + err.trace_term);

    let r_hat = state.rot.matrix();
    let rt = r_hat.transpose();
    let y_ups = terms.y_ups;
    let e_p_body = rt * err.e_p;
    let p_cross_body = rt * skew(&state.p_hat) * r_hat;

    let w_omega =
        y_ups.component_mul(&state.sigma_hat) * (T::of(4.0) / terms.lambda1 * gains.k_w / den);
    let w_v = -p_cross_body * w_omega + e_p_body * (gains.k_w / gains.varrho);

    let e_p_sq = err.e_p.norm_squared();
    let b_omega_dot = y_ups * (gains.gamma_b * T::of(0.5) * (one + err.e_r) * err.e_r.exp())
        - (rt * (skew(&state.p_hat) * err.e_p)) * (gains.gamma_b * e_p_sq)
        - state.b_omega_hat * (gains.gamma_b * gains.k_b);
    let b_v_dot = e_p_body * (gains.gamma_b * e_p_sq) - state.b_v_hat * (gains.gamma_b * gains.k_b);

    let k_e = gains.gamma_sigma * (one + err.e_r) * err.e_r.exp() / den;
    let sigma_dot = y_ups.component_mul(&y_ups) * (T::of(2.0) * gains.k_w / terms.lambda1 * k_e)
        - state.sigma_hat * (gains.gamma_sigma * gains.k_sigma);

    let gamma_rate = frame.omega_m - state.b_omega_hat - w_omega;
    let rot_next = Rotation::project(state.rot.compose(&so3_exp(&(gamma_rate * dt))).matrix())
        .map_err(|_| FilterError::Diverged)?;
    let p_next = state.p_hat + state.rot.act(&(frame.v_m - state.b_v_hat - w_v)) * dt;

    let next = FilterState {
        rot: rot_next,
        p_hat: p_next,
        b_omega_hat: state.b_omega_hat + b_omega_dot * dt,
        b_v_hat: state.b_v_hat + b_v_dot * dt,
        sigma_hat: state.sigma_hat + sigma_dot * dt,
    };
    if ![next.p_hat, next.b_omega_hat, next.b_v_hat, next.sigma_hat]
        .iter()
        .all(finite3)
    {
        return Err(FilterError::Diverged);
    }
    Ok(Stepped {
        state: next,
        clamped,
    })
}

struct DirectTermsQuat<T: Real> {
    snapshot: ErrorSnapshot<T>,
    y_ups: Vector3<T>,
    lambda1: T,
}

/// Quaternion-chart evaluation of the measurement-space terms, built
/// from sandwich products: `a_hat_i = Y(Q_hat^-1, a_i)`, the inner
/// matrices `M_1 = sum(s_i b_i a_i^T)` and `M_2 = (sum(s_i a_hat_i
/// a_i^T))^-1`, and the conjugated position error
/// `e_p = P_hat + (Y(Q_hat, k_v) - Y(Q_hat, M_1 M_2 Y(Q_hat^-1, m_v))) / m_c`.
fn direct_terms_quat<T: Real>(
    state: &QuatFilterState<T>,
    frame: &MeasurementFrame<T>,
    mats: &DirectMatrices<T>,
) -> Result<DirectTermsQuat<T>, FilterError> {
    let q_hat_inv = state.quat.inverse();
    let half = T::of(0.5);
    let quarter = T::of(0.25);

    let mut inner = Vector3::zeros();
    let mut m1 = Matrix3::<T>::zeros();
    let mut m2 = Matrix3::<T>::zeros();
    let mut e_r = T::zero();
    for ((a, b), &s) in frame
        .inertial_vectors
        .iter()
        .zip(&frame.body_vectors)
        .zip(&frame.weights_vectors)
    {
        let a_hat = q_hat_inv.sandwich(a);
        inner += a_hat.cross(b) * (s * half);
        m1 += b * a.transpose() * s;
        m2 += a_hat * a.transpose() * s;
        e_r += s * (T::one() - a_hat.dot(b));
    }
    e_r *= quarter;
    let upsilon = state.quat.sandwich(&inner);

    let m2_inv = m2.try_inverse().ok_or(FilterError::SingularInnerMatrix)?;
    let trace_term = (m1 * m2_inv).trace();

    let mut k_v = Vector3::zeros();
    for (p, &s) in frame.body_landmarks.iter().zip(&frame.weights_landmarks) {
        k_v += p * s;
    }
    let centered = m1 * (m2_inv * q_hat_inv.sandwich(&mats.m_v));
    let e_p = state.p_hat + (state.quat.sandwich(&k_v) - state.quat.sandwich(&centered)) / mats.m_c;

    Ok(DirectTermsQuat {
        snapshot: ErrorSnapshot {
            e_r,
            e_p,
            upsilon,
            trace_term,
        },
        y_ups: inner,
        lambda1: mats.lambda1,
    })
}

/// Quaternion-chart counterpart of [`direct_errors`].
pub fn direct_errors_quat<T: Real>(
    state: &QuatFilterState<T>,
    frame: &MeasurementFrame<T>,
) -> Result<ErrorSnapshot<T>, FilterError> {
    let mats = build_direct_matrices(frame)?;
    Ok(direct_terms_quat(state, frame, &mats)?.snapshot)
}

/// One step of the direct estimator on the quaternion chart.
pub fn direct_step_quat<T: Real>(
    state: &QuatFilterState<T>,
    frame: &MeasurementFrame<T>,
    gains: &Gains<T>,
    dt: T,
) -> Result<Stepped<QuatFilterState<T>>, FilterError> {
    let mats = build_direct_matrices(frame)?;
    let terms = direct_terms_quat(state, frame, &mats)?;
    if !(gains.k_w > T::of(3.0 / 8.0) * terms.lambda1) {
        return Err(FilterError::BadGains(format!(
            "k_w must exceed (3/8) lambda1 = {}",
            (terms.lambda1 * T::of(3.0 / 8.0))
                .to_f64()
                .unwrap_or(f64::NAN)
        )));
    }
    let one = T::one();
    let err = &terms.snapshot;
    let (den, clamped) = clamp_denom(one + err.trace_term);

    let q_hat_inv = state.quat.inverse();
    let y_ups = terms.y_ups;
    let p_hat_body = q_hat_inv.sandwich(&state.p_hat);
    let e_p_body = q_hat_inv.sandwich(&err.e_p);

    let w_omega =
        y_ups.component_mul(&state.sigma_hat) * (T::of(4.0) / terms.lambda1 * gains.k_w / den);
    let w_v = -skew(&p_hat_body) * w_omega + e_p_body * (gains.k_w / gains.varrho);

    let e_p_sq = err.e_p.norm_squared();
    let b_omega_dot = y_ups * (gains.gamma_b * T::of(0.5) * (one + err.e_r) * err.e_r.exp())
        - skew(&p_hat_body) * e_p_body * (gains.gamma_b * e_p_sq)
        - state.b_omega_hat * (gains.gamma_b * gains.k_b);
    let b_v_dot = e_p_body * (gains.gamma_b * e_p_sq) - state.b_v_hat * (gains.gamma_b * gains.k_b);

    let k_e = gains.gamma_sigma * (one + err.e_r) * err.e_r.exp() / den;
    let sigma_dot = y_ups.component_mul(&y_ups) * (T::of(2.0) * gains.k_w / terms.lambda1 * k_e)
        - state.sigma_hat * (gains.gamma_sigma * gains.k_sigma);

    let gamma_rate = frame.omega_m - state.b_omega_hat - w_omega;
    let quat_next = state.quat.mul(&UnitQuat::exp(&(gamma_rate * dt)));
    let p_next = state.p_hat + state.quat.sandwich(&(frame.v_m - state.b_v_hat - w_v)) * dt;

    let next = QuatFilterState {
        quat: quat_next,
        p_hat: p_next,
        b_omega_hat: state.b_omega_hat + b_omega_dot * dt,
        b_v_hat: state.b_v_hat + b_v_dot * dt,
        sigma_hat: state.sigma_hat + sigma_dot * dt,
    };
    if !(next.quat.q0.is_finite() && finite3(&next.quat.q))
        || ![next.p_hat, next.b_omega_hat, next.b_v_hat, next.sigma_hat]
            .iter()
            .all(finite3)
    {
        return Err(FilterError::Diverged);
    }
    Ok(Stepped {
        state: next,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Pose;

    type V = Vector3<f64>;

    fn axis_frame(state_rot: &Rotation<f64>, truth: &Pose<f64>) -> MeasurementFrame<f64> {
        let _ = state_rot;
        let inertial = vec![V::x(), V::y(), V::z()];
        let rt = truth.rotation.transpose();
        let body: Vec<V> = inertial.iter().map(|a| rt.act(a)).collect();
        let landmark = V::new(0.5, 2.0f64.sqrt(), 1.0);
        MeasurementFrame {
            t: 0.0,
            omega_m: V::zeros(),
            v_m: V::zeros(),
            body_vectors: body,
            inertial_vectors: inertial,
            weights_vectors: vec![1.0, 1.0, 1.0],
            body_landmarks: vec![rt.act(&(landmark - truth.position))],
            inertial_landmarks: vec![landmark],
            weights_landmarks: vec![1.0],
        }
    }

    #[test]
    fn axis_triad_matrices() {
        let truth = Pose::identity();
        let frame = axis_frame(&Rotation::identity(), &truth);
        let mats = build_direct_matrices(&frame).unwrap();
        assert!((mats.m_r - Matrix3::identity()).norm() < 1e-15);
        assert!((mats.lambda1 - 2.0).abs() < 1e-12);
        assert_eq!(mats.m_c, 1.0);
    }

    #[test]
    fn repeated_vectors_are_rank_deficient() {
        let mut frame = axis_frame(&Rotation::identity(), &Pose::identity());
        frame.inertial_vectors = vec![V::x(), V::x(), V::x()];
        frame.body_vectors = frame.inertial_vectors.clone();
        assert!(matches!(
            build_direct_matrices(&frame),
            Err(FilterError::RankDeficient)
        ));
    }

    #[test]
    fn zero_errors_at_truth() {
        let truth = Pose::new(
            Rotation::angle_axis(0.9, &V::new(0.6, 0.8, 0.0)).unwrap(),
            V::new(1.0, -2.0, 0.5),
        );
        let frame = axis_frame(&truth.rotation, &truth);
        let state = FilterState::new(truth.rotation, truth.position);
        let err = direct_errors(&state, &frame).unwrap();
        assert!(err.e_r.abs() < 1e-14);
        assert!(err.e_p.norm() < 1e-13);
        assert!(err.upsilon.norm() < 1e-14);
        assert!((err.trace_term - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quat_terms_match_matrix_terms() {
        let truth = Pose::new(
            Rotation::angle_axis(1.3, &V::new(0.0, 0.6, 0.8)).unwrap(),
            V::new(-2.0, 1.0, 4.0),
        );
        let frame = axis_frame(&truth.rotation, &truth);
        let state = FilterState::new(
            Rotation::angle_axis(0.4, &V::new(1.0, 0.0, 0.0)).unwrap(),
            V::new(0.0, 0.5, -1.0),
        );
        let a = direct_errors(&state, &frame).unwrap();
        let b = direct_errors_quat(&state.to_quat(), &frame).unwrap();
        assert!((a.e_r - b.e_r).abs() < 1e-12);
        assert!((a.e_p - b.e_p).norm() < 1e-12);
        assert!((a.upsilon - b.upsilon).norm() < 1e-12);
        assert!((a.trace_term - b.trace_term).abs() < 1e-12);
    }
}

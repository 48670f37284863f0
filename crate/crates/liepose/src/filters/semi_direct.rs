//! Semi-direct estimator: driven by a reconstructed pose each step.

use nalgebra::Vector3;

use super::{
    clamp_denom, finite3, ErrorSnapshot, FilterError, FilterState, Gains, QuatFilterState, Stepped,
};
use crate::algebra::{norm_dist_identity, skew, so3_exp, upsilon_a, Rotation};
use crate::quat::UnitQuat;
use crate::sim::MeasurementFrame;
use crate::wahba::ReconstructedPose;
use crate::Real;

/// Error terms of the semi-direct estimator against a reconstructed pose:
/// attitude error `R_tilde = R_hat R_y^T`, `e_r = Tr(I - R_tilde) / 4`,
/// `e_p = P_hat - R_tilde P_y`, and the rotational error direction
/// `upsilon = vex(Pa(R_tilde))`.
pub fn semi_direct_errors<T: Real>(
    state: &FilterState<T>,
    t_y: &ReconstructedPose<T>,
) -> ErrorSnapshot<T> {
    let r_tilde = state.rot.compose(&t_y.pose.rotation.transpose());
    let e_r = norm_dist_identity(r_tilde.matrix());
    let e_p = state.p_hat - r_tilde.act(&t_y.pose.position);
    ErrorSnapshot {
        e_r,
        e_p,
        upsilon: upsilon_a(r_tilde.matrix()),
        trace_term: T::one() - e_r,
    }
}

/// One step of the semi-direct estimator on the matrix chart.
///
/// The correction and adaptation laws are evaluated at the current state
/// (explicit scheme); the attitude advances by the closed-form rotation
/// `exp(dt * gamma)` and is reprojected, everything else by an Euler
/// step.
///
/// Fails with [`FilterError::Diverged`] when the stepped state stops
/// being finite; the adaptation laws are cubic in the position error and
/// can escape in finite time after a heavy kick near the singular set.
pub fn semi_direct_step<T: Real>(
    state: &FilterState<T>,
    frame: &MeasurementFrame<T>,
    t_y: &ReconstructedPose<T>,
    gains: &Gains<T>,
    dt: T,
) -> Result<Stepped<FilterState<T>>, FilterError> {
    let err = semi_direct_errors(state, t_y);
    let (den, clamped) = clamp_denom(T::one() - err.e_r);
    let one = T::one();
    let two = T::of(2.0);

    let r_hat = state.rot.matrix();
    let rt = r_hat.transpose();
    let rt_upsilon = rt * err.upsilon;
    let e_p_body = rt * err.e_p;
    // R_hat^T [P_hat]_x R_hat, the body-frame moment of the position
    let p_cross_body = rt * skew(&state.p_hat) * r_hat;

    let w_omega = rt_upsilon.component_mul(&state.sigma_hat) * (two * gains.k_w / den);
    let w_v = -p_cross_body * w_omega + e_p_body * (gains.k_w / gains.varrho);

    let e_p_sq = err.e_p.norm_squared();
    let b_omega_dot = rt_upsilon * (gains.gamma_b * T::of(0.5) * (one + err.e_r) * err.e_r.exp())
        - (rt * (skew(&state.p_hat) * err.e_p)) * (gains.gamma_b * e_p_sq)
        - state.b_omega_hat * (gains.gamma_b * gains.k_b);
    let b_v_dot = e_p_body * (gains.gamma_b * e_p_sq) - state.b_v_hat * (gains.gamma_b * gains.k_b);

    let k_e = gains.gamma_sigma * ((one + err.e_r) / den) * err.e_r.exp();
    let sigma_dot = rt_upsilon.component_mul(&rt_upsilon) * (gains.k_w * k_e)
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

/// Quaternion-chart error terms: `Q_tilde = Q_hat (*) Q_y^-1`,
/// `e_r = 1 - q0_tilde^2`, `e_p = P_hat - Y(Q_tilde, P_y)`, and
/// `upsilon = 2 q0_tilde q_tilde` (the same rotational error direction as
/// the matrix chart).
pub fn semi_direct_errors_quat<T: Real>(
    state: &QuatFilterState<T>,
    q_y: &UnitQuat<T>,
    p_y: &Vector3<T>,
) -> ErrorSnapshot<T> {
    let q_tilde = state.quat.mul(&q_y.inverse());
    let e_r = T::one() - q_tilde.q0 * q_tilde.q0;
    let e_p = state.p_hat - q_tilde.sandwich(p_y);
    ErrorSnapshot {
        e_r,
        e_p,
        upsilon: q_tilde.q * (T::of(2.0) * q_tilde.q0),
        trace_term: T::one() - e_r,
    }
}

/// One step of the semi-direct estimator on the quaternion chart,
/// transcribed from the quaternion form of the laws (sandwich products
/// instead of matrix actions) with `Q_y = from_rot(R_y)`.
///
/// Fails with [`FilterError::Diverged`] under the same conditions as the
/// matrix chart.
pub fn semi_direct_step_quat<T: Real>(
    state: &QuatFilterState<T>,
    frame: &MeasurementFrame<T>,
    q_y: &UnitQuat<T>,
    p_y: &Vector3<T>,
    gains: &Gains<T>,
    dt: T,
) -> Result<Stepped<QuatFilterState<T>>, FilterError> {
    let one = T::one();
    let q_hat_inv = state.quat.inverse();
    let q_tilde = state.quat.mul(&q_y.inverse());
    let e_r = one - q_tilde.q0 * q_tilde.q0;
    let e_p = state.p_hat - q_tilde.sandwich(p_y);
    let (den, clamped) = clamp_denom(one - e_r);

    // Y(Q_hat^-1, q_tilde); the body-frame error direction up to the
    // factor 2 q0_tilde
    let y_q = q_hat_inv.sandwich(&q_tilde.q);
    let p_hat_body = q_hat_inv.sandwich(&state.p_hat);
    let e_p_body = q_hat_inv.sandwich(&e_p);

    let w_omega = y_q.component_mul(&state.sigma_hat) * (T::of(4.0) * q_tilde.q0 * gains.k_w / den);
    let w_v = -skew(&p_hat_body) * w_omega + e_p_body * (gains.k_w / gains.varrho);

    let e_p_sq = e_p.norm_squared();
    let b_omega_dot = y_q * (gains.gamma_b * (one + e_r) * q_tilde.q0 * e_r.exp())
        - skew(&p_hat_body) * e_p_body * (gains.gamma_b * e_p_sq)
        - state.b_omega_hat * (gains.gamma_b * gains.k_b);
    let b_v_dot = e_p_body * (gains.gamma_b * e_p_sq) - state.b_v_hat * (gains.gamma_b * gains.k_b);

    let k_e = gains.gamma_sigma * ((one + e_r) / den) * e_r.exp();
    let sigma_dot = y_q.component_mul(&y_q)
        * (T::of(4.0) * gains.k_w * q_tilde.q0 * q_tilde.q0 * k_e)
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

    #[test]
    fn zero_error_snapshot_at_matching_pose() {
        let pose = Pose::new(
            Rotation::angle_axis(0.8, &V::new(0.0, 0.6, 0.8)).unwrap(),
            V::new(1.0, 2.0, -1.0),
        );
        let state = FilterState::new(pose.rotation, pose.position);
        let t_y = ReconstructedPose {
            pose,
            conditioning: 1.0,
        };
        let err = semi_direct_errors(&state, &t_y);
        assert!(err.e_r < 1e-15);
        assert!(err.e_p.norm() < 1e-14);
        assert!(err.upsilon.norm() < 1e-15);
    }

    #[test]
    fn half_turn_offset_gives_unit_attitude_error() {
        let r_y = Rotation::angle_axis(0.3, &V::x()).unwrap();
        let p_y = V::new(0.5, -0.25, 2.0);
        let r_hat = r_y.compose(&Rotation::angle_axis(std::f64::consts::PI, &V::z()).unwrap());
        let r_tilde = r_hat.compose(&r_y.transpose());
        let state = FilterState::new(r_hat, r_tilde.act(&p_y));
        let t_y = ReconstructedPose {
            pose: Pose::new(r_y, p_y),
            conditioning: 1.0,
        };
        let err = semi_direct_errors(&state, &t_y);
        assert!((err.e_r - 1.0).abs() < 1e-14);
        assert!(err.e_p.norm() < 1e-14);
    }

    #[test]
    fn quat_and_matrix_errors_agree() {
        let r_y = Rotation::angle_axis(1.1, &V::new(0.6, 0.0, 0.8)).unwrap();
        let r_hat = Rotation::angle_axis(-0.4, &V::new(0.0, 1.0, 0.0)).unwrap();
        let p_y = V::new(1.0, 2.0, 3.0);
        let state = FilterState::new(r_hat, V::new(-1.0, 0.5, 0.25));
        let qstate = state.to_quat();
        let t_y = ReconstructedPose {
            pose: Pose::new(r_y, p_y),
            conditioning: 1.0,
        };
        let a = semi_direct_errors(&state, &t_y);
        let b = semi_direct_errors_quat(&qstate, &UnitQuat::from_rot(&r_y), &p_y);
        assert!((a.e_r - b.e_r).abs() < 1e-12);
        assert!((a.e_p - b.e_p).norm() < 1e-12);
        assert!((a.upsilon - b.upsilon).norm() < 1e-12);
    }
}

//! Two nonlinear stochastic pose estimators.
//!
//! The semi-direct estimator consumes a reconstructed pose (attitude from
//! the vector-alignment solution, position from landmark residuals) as
//! its output injection; the direct estimator builds its error terms from
//! the normalized vector and landmark measurements themselves, with no
//! reconstruction step. Both adapt an upper-bound estimate of the
//! angular-noise covariance diagonal (`sigma_hat`) that scales the
//! attitude correction, and both estimate the constant velocity biases.
//!
//! Each estimator exists in a rotation-matrix and a unit-quaternion form.
//! The quaternion forms are independent transcriptions of the same laws
//! (not wrappers around the matrix code); the crate's tests drive both on
//! identical inputs and bound their divergence.
//!
//! Discretization: explicit Euler at the caller's `dt` for the vector
//! states, while the attitude advances by the closed-form rotation about
//! the correction rate, `exp(dt * gamma)`, followed by reprojection. The
//! closed-form increment realizes the same continuous kinematics as an
//! Euler step but keeps the two attitude charts consistent to machine
//! precision even through the large-gain escape transient, where the
//! chart-specific truncation of additive stepping would dominate.
//!
//! The correction laws divide by `1 - e_R` (semi-direct) or
//! `1 + trace_term` (direct), which vanish on the measure-zero set of 180
//! degree attitude errors. Steps clamp those denominators below by
//! [`EPS_SING`] and report the clamp rather than failing, since a noisy
//! trajectory can graze the singular set that the underlying analysis
//! excludes.

mod direct;
mod semi_direct;

pub use direct::{
    build_direct_matrices, direct_errors, direct_errors_quat, direct_step, direct_step_quat,
    DirectMatrices,
};
pub use semi_direct::{
    semi_direct_errors, semi_direct_errors_quat, semi_direct_step, semi_direct_step_quat,
};

use nalgebra::{Vector3, Vector6};

use crate::algebra::Rotation;
use crate::quat::UnitQuat;
use crate::Real;

/// Lower clamp applied to the singular denominators of the correction
/// laws.
pub const EPS_SING: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error("gains violate the stability preconditions: {0}")]
    BadGains(String),
    #[error("measurement matrix is rank deficient")]
    RankDeficient,
    #[error("inner matrix is singular (attitude estimate near the unstable set)")]
    SingularInnerMatrix,
    #[error("estimator state diverged to non-finite values")]
    Diverged,
}

/// Estimator gains. Constructed through [`Gains::new`], which enforces
/// the stability preconditions (`k_w > 9/8`, everything else positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains<T: Real> {
    pub k_w: T,
    pub gamma_b: T,
    pub gamma_sigma: T,
    pub k_b: T,
    pub k_sigma: T,
    pub varrho: T,
}

impl<T: Real> Gains<T> {
    pub fn new(
        k_w: T,
        gamma_b: T,
        gamma_sigma: T,
        k_b: T,
        k_sigma: T,
        varrho: T,
    ) -> Result<Self, FilterError> {
        let g = Gains {
            k_w,
            gamma_b,
            gamma_sigma,
            k_b,
            k_sigma,
            varrho,
        };
        let all = [k_w, gamma_b, gamma_sigma, k_b, k_sigma, varrho];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(FilterError::BadGains("gains must be finite".to_string()));
        }
        if !(k_w > T::of(9.0 / 8.0)) {
            return Err(FilterError::BadGains(format!(
                "k_w must exceed 9/8, got {}",
                k_w.to_f64().unwrap_or(f64::NAN)
            )));
        }
        if [gamma_b, gamma_sigma, k_b, k_sigma, varrho]
            .iter()
            .any(|v| !(*v > T::zero()))
        {
            return Err(FilterError::BadGains(
                "gamma_b, gamma_sigma, k_b, k_sigma, varrho must be positive".to_string(),
            ));
        }
        Ok(g)
    }
}

/// Estimator state on the rotation-matrix chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState<T: Real> {
    pub rot: Rotation<T>,
    pub p_hat: Vector3<T>,
    pub b_omega_hat: Vector3<T>,
    pub b_v_hat: Vector3<T>,
    pub sigma_hat: Vector3<T>,
}

impl<T: Real> FilterState<T> {
    /// Initial state with zero bias and covariance-bound estimates.
    pub fn new(rot: Rotation<T>, p_hat: Vector3<T>) -> Self {
        FilterState {
            rot,
            p_hat,
            b_omega_hat: Vector3::zeros(),
            b_v_hat: Vector3::zeros(),
            sigma_hat: Vector3::zeros(),
        }
    }

    /// Stacked bias estimate `[b_omega; b_v]`.
    pub fn b_hat(&self) -> Vector6<T> {
        Vector6::new(
            self.b_omega_hat.x,
            self.b_omega_hat.y,
            self.b_omega_hat.z,
            self.b_v_hat.x,
            self.b_v_hat.y,
            self.b_v_hat.z,
        )
    }

    /// The same state expressed on the quaternion chart.
    pub fn to_quat(&self) -> QuatFilterState<T> {
        QuatFilterState {
            quat: UnitQuat::from_rot(&self.rot),
            p_hat: self.p_hat,
            b_omega_hat: self.b_omega_hat,
            b_v_hat: self.b_v_hat,
            sigma_hat: self.sigma_hat,
        }
    }
}

/// Estimator state on the unit-quaternion chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuatFilterState<T: Real> {
    pub quat: UnitQuat<T>,
    pub p_hat: Vector3<T>,
    pub b_omega_hat: Vector3<T>,
    pub b_v_hat: Vector3<T>,
    pub sigma_hat: Vector3<T>,
}

impl<T: Real> QuatFilterState<T> {
    pub fn new(quat: UnitQuat<T>, p_hat: Vector3<T>) -> Self {
        QuatFilterState {
            quat,
            p_hat,
            b_omega_hat: Vector3::zeros(),
            b_v_hat: Vector3::zeros(),
            sigma_hat: Vector3::zeros(),
        }
    }

    pub fn b_hat(&self) -> Vector6<T> {
        Vector6::new(
            self.b_omega_hat.x,
            self.b_omega_hat.y,
            self.b_omega_hat.z,
            self.b_v_hat.x,
            self.b_v_hat.y,
            self.b_v_hat.z,
        )
    }
}

/// The error quantities one estimator step is driven by.
///
/// For the semi-direct estimator `upsilon` is the rotational error
/// direction of the reconstructed attitude and `trace_term` is the
/// surrogate `1 - e_r`; for the direct estimator `upsilon` and
/// `trace_term` are the measurement-space sums that replace them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSnapshot<T: Real> {
    pub e_r: T,
    pub e_p: Vector3<T>,
    pub upsilon: Vector3<T>,
    pub trace_term: T,
}

/// Step output: the advanced state plus whether the singularity guard
/// clamped a denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepped<S> {
    pub state: S,
    pub clamped: bool,
}

/// Clamps a correction-law denominator below by [`EPS_SING`].
pub(crate) fn clamp_denom<T: Real>(x: T) -> (T, bool) {
    let eps = T::of(EPS_SING);
    if x < eps {
        (eps, true)
    } else {
        (x, false)
    }
}

/// True when every component of `v` is finite.
pub(crate) fn finite3<T: Real>(v: &Vector3<T>) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gains_reject_small_k_w() {
        assert!(Gains::new(8.0, 1.0, 1.0, 0.1, 0.1, 0.2).is_ok());
        assert!(matches!(
            Gains::new(9.0 / 8.0, 1.0, 1.0, 0.1, 0.1, 0.2),
            Err(FilterError::BadGains(_))
        ));
        assert!(matches!(
            Gains::new(1.0, 1.0, 1.0, 0.1, 0.1, 0.2),
            Err(FilterError::BadGains(_))
        ));
    }

    #[test]
    fn gains_reject_nonpositive_rates() {
        assert!(Gains::new(8.0, 0.0, 1.0, 0.1, 0.1, 0.2).is_err());
        assert!(Gains::new(8.0, 1.0, 1.0, 0.1, 0.1, -0.2).is_err());
    }

    #[test]
    fn clamp_reports() {
        assert_eq!(clamp_denom(0.5), (0.5, false));
        assert_eq!(clamp_denom(1e-9), (EPS_SING, true));
        assert_eq!(clamp_denom(-2.0), (EPS_SING, true));
    }
}

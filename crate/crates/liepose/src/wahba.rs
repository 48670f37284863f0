//! Static pose reconstruction from one measurement frame.
//!
//! Attitude comes from the SVD solution of the weighted vector-alignment
//! problem; position follows by averaging landmark residuals under the
//! reconstructed attitude. The result feeds the semi-direct estimator,
//! which treats the reconstructed pose as its (noisy) output injection.

use nalgebra::{Matrix3, Vector3};

use crate::algebra::{sorted_svd3, AlgebraError, Pose, Rotation};
use crate::sim::MeasurementFrame;
use crate::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WahbaError {
    #[error("profile matrix is rank deficient")]
    RankDeficient,
    #[error("position reconstruction needs a nonzero landmark weight sum")]
    ZeroWeightSum,
    #[error("input lengths disagree: {0} body vs {1} inertial vs {2} weights")]
    LengthMismatch(usize, usize, usize),
}

/// Pose recovered from one frame, plus the smallest singular value of the
/// attitude profile matrix as a conditioning diagnostic (positive
/// whenever the vector set has rank 3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructedPose<T: Real> {
    pub pose: Pose<T>,
    pub conditioning: T,
}

/// Rotation minimizing `sum(s_i |b_i - R^T a_i|^2)` over SO(3), for unit
/// direction pairs `b_i` (body) and `a_i` (inertial).
///
/// Solved through the SVD of the weighted profile matrix
/// `B = sum(s_i b_i a_i^T)`: with `B = U S V^T` (singular values
/// descending), the optimum is `V diag(1, 1, det(U) det(V)) U^T`, which
/// attaches the orientation fix to the smallest singular value.
pub fn solve_wahba<T: Real>(
    body: &[Vector3<T>],
    inertial: &[Vector3<T>],
    weights: &[T],
) -> Result<(Rotation<T>, T), WahbaError> {
    if body.len() != inertial.len() || body.len() != weights.len() {
        return Err(WahbaError::LengthMismatch(
            body.len(),
            inertial.len(),
            weights.len(),
        ));
    }
    let mut profile = Matrix3::<T>::zeros();
    for ((b, a), &s) in body.iter().zip(inertial).zip(weights) {
        profile += b * a.transpose() * s;
    }
    let (u, s, v_t) = sorted_svd3(&profile);
    if !(s[2] > s[0] * T::of(1e3) * T::default_epsilon()) {
        return Err(WahbaError::RankDeficient);
    }
    let sign = u.determinant() * v_t.determinant();
    let mut d = Matrix3::identity();
    if sign < T::zero() {
        d[(2, 2)] = -T::one();
    }
    let r = v_t.transpose() * d * u.transpose();
    Ok((Rotation::from_matrix_unchecked(r), s[2]))
}

/// Position from landmark residuals under a known attitude:
/// `sum(s_j (p_j^I - R_y p_j^B)) / sum(s_j)`.
pub fn reconstruct_position<T: Real>(
    r_y: &Rotation<T>,
    inertial_landmarks: &[Vector3<T>],
    body_landmarks: &[Vector3<T>],
    weights: &[T],
) -> Result<Vector3<T>, WahbaError> {
    if inertial_landmarks.len() != body_landmarks.len() || inertial_landmarks.len() != weights.len()
    {
        return Err(WahbaError::LengthMismatch(
            body_landmarks.len(),
            inertial_landmarks.len(),
            weights.len(),
        ));
    }
    let wsum = weights.iter().fold(T::zero(), |a, &w| a + w);
    if wsum == T::zero() || inertial_landmarks.is_empty() {
        return Err(WahbaError::ZeroWeightSum);
    }
    let acc = inertial_landmarks
        .iter()
        .zip(body_landmarks)
        .zip(weights)
        .fold(Vector3::zeros(), |a: Vector3<T>, ((pi, pb), &s)| {
            a + (pi - r_y.act(pb)) * s
        });
    Ok(acc / wsum)
}

/// Full pose reconstruction from one frame.
pub fn reconstruct_pose<T: Real>(
    frame: &MeasurementFrame<T>,
) -> Result<ReconstructedPose<T>, WahbaError> {
    let (rotation, conditioning) = solve_wahba(
        &frame.body_vectors,
        &frame.inertial_vectors,
        &frame.weights_vectors,
    )?;
    let position = reconstruct_position(
        &rotation,
        &frame.inertial_landmarks,
        &frame.body_landmarks,
        &frame.weights_landmarks,
    )?;
    Ok(ReconstructedPose {
        pose: Pose::new(rotation, position),
        conditioning,
    })
}

impl From<AlgebraError> for WahbaError {
    fn from(_: AlgebraError) -> Self {
        WahbaError::RankDeficient
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    type V = Vector3<f64>;

    fn unit_triad() -> Vec<V> {
        vec![V::x(), V::y(), V::z()]
    }

    #[test]
    fn aligned_frames_give_identity() {
        let vs = unit_triad();
        let (r, cond) = solve_wahba(&vs, &vs, &[1.0, 1.0, 1.0]).unwrap();
        assert!((r.matrix() - Matrix3::identity()).norm() < 1e-14);
        assert!((cond - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weight_scaling_leaves_rotation_unchanged() {
        let r_true = Rotation::angle_axis(1.2, &V::new(0.0, 0.6, 0.8)).unwrap();
        let inertial = vec![
            V::new(1.0, -1.0, 1.0).normalize(),
            V::z(),
            V::new(-1.0, -1.0, 0.0).normalize(),
        ];
        let body: Vec<V> = inertial.iter().map(|v| r_true.transpose().act(v)).collect();
        let (a, _) = solve_wahba(&body, &inertial, &[1.0, 1.0, 1.0]).unwrap();
        let (b, _) = solve_wahba(&body, &inertial, &[7.0, 7.0, 7.0]).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-12);
        assert!((a.matrix() - r_true.matrix()).norm() < 1e-12);
    }

    #[test]
    fn rank_deficient_profile_is_rejected() {
        let vs = vec![V::x(), V::x(), V::x()];
        assert!(matches!(
            solve_wahba(&vs, &vs, &[1.0, 1.0, 1.0]),
            Err(WahbaError::RankDeficient)
        ));
    }

    #[test]
    fn position_from_single_noise_free_landmark() {
        // identity pose, landmark observed exactly: residual is zero
        let p = reconstruct_position(
            &Rotation::identity(),
            &[V::new(1.0, 2.0, 3.0)],
            &[V::new(1.0, 2.0, 3.0)],
            &[1.0],
        )
        .unwrap();
        assert_eq!(p, V::zeros());
    }

    #[test]
    fn bias_only_landmark_shifts_position_by_rotated_bias() {
        let r = Rotation::angle_axis(0.9, &V::new(0.6, 0.8, 0.0)).unwrap();
        let p_true = V::new(1.0, -4.0, 2.0);
        let landmark = V::new(0.5, 2.0, 1.0);
        let bias = V::new(0.03, 0.02, -0.02);
        let body = r.transpose().act(&(landmark - p_true)) + bias;
        let p_y = reconstruct_position(&r, &[landmark], &[body], &[1.0]).unwrap();
        assert!((p_y - (p_true - r.act(&bias))).norm() < 1e-12);
    }
}

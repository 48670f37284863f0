//! SO(3)/SE(3) primitives.
//!
//! Conventions used throughout the crate:
//!
//! * rotations map body-frame coordinates to inertial coordinates,
//!   `x_I = R x_B`;
//! * `skew(v)` is the antisymmetric matrix with `skew(v) * y == v.cross(y)`;
//! * the normalized distance of a rotation from the identity is
//!   `dist = Tr(I - R) / 4`, which lies in `[0, 1]` and equals
//!   `sin^2(angle / 2)`.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector6};

use crate::Real;

/// Failures of the exact-algebra layer.
///
/// Diagnostic magnitudes are reported as `f64` regardless of the scalar
/// type in use.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("matrix is not antisymmetric (symmetric part has max entry {max_sym:.3e})")]
    NotAntisymmetric { max_sym: f64 },
    #[error("rotation axis must have unit norm (got {norm:.12})")]
    NonUnitAxis { norm: f64 },
    #[error("matrix is not a valid rotation (Gram defect {gram:.3e}, det {det:.6})")]
    NotARotation { gram: f64, det: f64 },
    #[error("matrix is numerically rank deficient")]
    RankDeficient,
}

fn diag_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Antisymmetric (cross-product) matrix of a vector: `skew(v) y = v x y`.
pub fn skew<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    let z = T::zero();
    Matrix3::new(z, -v.z, v.y, v.z, z, -v.x, -v.y, v.x, z)
}

/// Inverse of [`skew`], defined on antisymmetric matrices.
///
/// The symmetric part of the input must vanish to within
/// [`Real::VEX_TOL`] in max norm; the extraction averages the two copies
/// of each off-diagonal entry so that round-off in the input does not
/// bias the result.
pub fn vex<T: Real>(m: &Matrix3<T>) -> Result<Vector3<T>, AlgebraError> {
    let sym = (m + m.transpose()) * T::of(0.5);
    let max_sym = sym.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    if max_sym > T::VEX_TOL {
        return Err(AlgebraError::NotAntisymmetric {
            max_sym: diag_f64(max_sym),
        });
    }
    Ok(vex_unchecked(m))
}

fn vex_unchecked<T: Real>(m: &Matrix3<T>) -> Vector3<T> {
    let half = T::of(0.5);
    Vector3::new(
        (m[(2, 1)] - m[(1, 2)]) * half,
        (m[(0, 2)] - m[(2, 0)]) * half,
        (m[(1, 0)] - m[(0, 1)]) * half,
    )
}

/// Antisymmetric projection `(M - M^T) / 2`.
pub fn pa<T: Real>(m: &Matrix3<T>) -> Matrix3<T> {
    (m - m.transpose()) * T::of(0.5)
}

/// `vex` of the antisymmetric projection. Total on all of `R^{3x3}`.
pub fn upsilon_a<T: Real>(m: &Matrix3<T>) -> Vector3<T> {
    vex_unchecked(m)
}

/// Normalized distance from the identity, `Tr(I - M) / 4`.
///
/// Defined for any square matrix; on rotations it lies in `[0, 1]`.
pub fn norm_dist_identity<T: Real>(m: &Matrix3<T>) -> T {
    (T::of(3.0) - m.trace()) * T::of(0.25)
}

/// SE(3) Lie-algebra embedding of a stacked twist `[omega; v]`.
pub fn wedge6<T: Real>(y: &Vector6<T>) -> Matrix4<T> {
    let omega = Vector3::new(y[0], y[1], y[2]);
    let mut out = Matrix4::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&omega));
    out.fixed_view_mut::<3, 1>(0, 3)
        .copy_from(&Vector3::new(y[3], y[4], y[5]));
    out
}

/// Max-norm of the Gram defect `M^T M - I`.
pub fn gram_defect<T: Real>(m: &Matrix3<T>) -> T {
    let d = m.transpose() * m - Matrix3::identity();
    d.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

/// Exponential of `skew(g)`, i.e. the rotation by angle `|g|` about `g`.
///
/// Uses series expansions of `sin(a)/a` and `(1 - cos(a))/a^2` near zero,
/// so it is smooth through `g = 0`.
pub fn so3_exp<T: Real>(g: &Vector3<T>) -> Rotation<T> {
    let a2 = g.norm_squared();
    let (s, c) = if a2 < T::default_epsilon().sqrt() {
        // sin(a)/a and (1 - cos(a))/a^2 to O(a^6)
        let s = T::one() - a2 / T::of(6.0) + a2 * a2 / T::of(120.0);
        let c = T::of(0.5) - a2 / T::of(24.0) + a2 * a2 / T::of(720.0);
        (s, c)
    } else {
        let a = a2.sqrt();
        ((a.sin()) / a, (T::one() - a.cos()) / a2)
    };
    let gx = skew(g);
    Rotation(Matrix3::identity() + gx * s + gx * gx * c)
}

/// Singular value decomposition of a 3x3 matrix with the singular values
/// sorted in descending order. Ties keep the original column order.
///
/// Returns `(u, s, v_t)` with `m = u * diag(s) * v_t`.
pub fn sorted_svd3<T: Real>(m: &Matrix3<T>) -> (Matrix3<T>, Vector3<T>, Matrix3<T>) {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let s = svd.singular_values;

    let mut order = [0usize, 1, 2];
    // insertion sort, stable, descending
    for i in 1..3 {
        let mut j = i;
        while j > 0 && s[order[j - 1]] < s[order[j]] {
            order.swap(j - 1, j);
            j -= 1;
        }
    }

    let mut us = Matrix3::zeros();
    let mut vts = Matrix3::zeros();
    let mut ss = Vector3::zeros();
    for (k, &i) in order.iter().enumerate() {
        us.set_column(k, &u.column(i));
        vts.set_row(k, &v_t.row(i));
        ss[k] = s[i];
    }
    (us, ss, vts)
}

/// A validated rotation matrix.
///
/// Constructors either build the matrix from an exact parametrization or
/// check the Gram defect and determinant, so a held value can be assumed
/// orthogonal to working precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation<T: Real>(Matrix3<T>);

impl<T: Real> Rotation<T> {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Wraps a matrix the caller guarantees to be a rotation.
    pub fn from_matrix_unchecked(m: Matrix3<T>) -> Self {
        debug_assert!(gram_defect(&m) <= T::GRAM_TOL);
        Rotation(m)
    }

    /// Validates and wraps a matrix.
    ///
    /// Rejects matrices whose Gram defect exceeds [`Real::GRAM_TOL`] in
    /// max norm or whose determinant is not positive.
    pub fn try_new(m: Matrix3<T>) -> Result<Self, AlgebraError> {
        let gram = gram_defect(&m);
        let det = m.determinant();
        if gram > T::GRAM_TOL || det <= T::zero() {
            return Err(AlgebraError::NotARotation {
                gram: diag_f64(gram),
                det: diag_f64(det),
            });
        }
        Ok(Rotation(m))
    }

    /// Rotation by `alpha` about the unit axis `u`:
    /// `I + sin(alpha) skew(u) + (1 - cos(alpha)) skew(u)^2`.
    pub fn angle_axis(alpha: T, u: &Vector3<T>) -> Result<Self, AlgebraError> {
        let norm = u.norm();
        if (norm - T::one()).abs() > T::GRAM_TOL {
            return Err(AlgebraError::NonUnitAxis {
                norm: diag_f64(norm),
            });
        }
        let ux = skew(u);
        Ok(Rotation(
            Matrix3::identity() + ux * alpha.sin() + ux * ux * (T::one() - alpha.cos()),
        ))
    }

    /// Rodriguez-vector chart:
    /// `((1 - |p|^2) I + 2 p p^T + 2 skew(p)) / (1 + |p|^2)`.
    ///
    /// Total on all of `R^3`; the image omits only the 180 degree
    /// rotations.
    pub fn rodriguez(rho: &Vector3<T>) -> Self {
        let n2 = rho.norm_squared();
        let two = T::of(2.0);
        let m =
            (Matrix3::identity() * (T::one() - n2) + rho * rho.transpose() * two + skew(rho) * two)
                / (T::one() + n2);
        Rotation(m)
    }

    /// Nearest rotation to an arbitrary full-rank matrix (orientation
    /// preserving polar factor).
    ///
    /// Computed from the sorted SVD as `u * diag(1, 1, det(u) det(v)) * v_t`,
    /// which attaches a possible reflection to the smallest singular
    /// value. Idempotent on valid rotations up to round-off.
    pub fn project(m: &Matrix3<T>) -> Result<Self, AlgebraError> {
        let (u, s, v_t) = sorted_svd3(m);
        if !(s[2] > s[0] * T::of(1e3) * T::default_epsilon()) {
            return Err(AlgebraError::RankDeficient);
        }
        let sign = u.determinant() * v_t.determinant();
        let d = if sign < T::zero() {
            Matrix3::from_diagonal(&Vector3::new(T::one(), T::one(), -T::one()))
        } else {
            Matrix3::identity()
        };
        Ok(Rotation(u * d * v_t))
    }

    pub fn matrix(&self) -> &Matrix3<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix3<T> {
        self.0
    }

    /// The inverse rotation. Exact: just the transpose.
    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    /// Group composition `self * other`.
    ///
    /// No revalidation: the Gram defect of a product is bounded by the
    /// sum of the factors' defects, which stays far below the tolerance
    /// for matrices built by this type's constructors.
    pub fn compose(&self, other: &Self) -> Self {
        Rotation(self.0 * other.0)
    }

    /// Applies the rotation to a vector.
    pub fn act(&self, v: &Vector3<T>) -> Vector3<T> {
        self.0 * v
    }

    /// Normalized distance from the identity, clamped to `[0, 1]`.
    pub fn dist_identity(&self) -> T {
        norm_dist_identity(&self.0).max(T::zero()).min(T::one())
    }
}

/// A rigid transform `(R, p)`: `x_I = R x_B + p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T: Real> {
    pub rotation: Rotation<T>,
    pub position: Vector3<T>,
}

impl<T: Real> Pose<T> {
    pub fn identity() -> Self {
        Pose {
            rotation: Rotation::identity(),
            position: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Rotation<T>, position: Vector3<T>) -> Self {
        Pose { rotation, position }
    }

    /// Group composition: `(R1, p1) * (R2, p2) = (R1 R2, R1 p2 + p1)`.
    pub fn compose(&self, other: &Self) -> Self {
        Pose {
            rotation: self.rotation.compose(&other.rotation),
            position: self.rotation.act(&other.position) + self.position,
        }
    }

    /// Group inverse: `(R^T, -R^T p)`.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Pose {
            position: -rt.act(&self.position),
            rotation: rt,
        }
    }

    /// Homogeneous 4x4 form.
    pub fn as_matrix(&self) -> Matrix4<T> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    type V = Vector3<f64>;

    #[test]
    fn skew_reproduces_cross_product() {
        let x = V::new(1.0, -2.0, 0.5);
        let y = V::new(0.3, 4.0, -1.0);
        assert_eq!(skew(&x) * y, x.cross(&y));
    }

    #[test]
    fn vex_inverts_skew() {
        let x = V::new(0.1, 2.0, -3.0);
        assert_eq!(vex(&skew(&x)).unwrap(), x);
    }

    #[test]
    fn vex_rejects_symmetric_contamination() {
        let mut m = skew(&V::new(1.0, 0.0, 0.0));
        m[(0, 0)] = 1e-3;
        assert!(matches!(
            vex(&m),
            Err(AlgebraError::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn dist_identity_of_half_turn_is_one() {
        let r = Rotation::angle_axis(std::f64::consts::PI, &V::z()).unwrap();
        assert!((r.dist_identity() - 1.0).abs() < 1e-15);
        assert!(Rotation::<f64>::identity().dist_identity() == 0.0);
    }

    #[test]
    fn rodriguez_unit_z_is_quarter_turn() {
        // rho = e3 maps to a 90 degree yaw
        let r = Rotation::rodriguez(&V::z());
        let expected = Rotation::angle_axis(std::f64::consts::FRAC_PI_2, &V::z()).unwrap();
        assert!((r.matrix() - expected.matrix()).norm() < 1e-15);
    }

    #[test]
    fn project_restores_perturbed_rotation() {
        let r = Rotation::angle_axis(1.1, &V::new(0.0, 1.0, 0.0)).unwrap();
        let noisy = r.matrix() + Matrix3::from_element(1e-8);
        let back = Rotation::project(&noisy).unwrap();
        assert!(gram_defect(back.matrix()) < 1e-14);
        assert!((back.matrix() - r.matrix()).norm() < 1e-7);
    }

    #[test]
    fn project_rejects_rank_deficient_input() {
        let mut m = Matrix3::zeros();
        m[(0, 0)] = 1.0;
        m[(1, 1)] = 1.0;
        assert!(matches!(
            Rotation::project(&m),
            Err(AlgebraError::RankDeficient)
        ));
    }

    #[test]
    fn pose_inverse_composes_to_identity() {
        let pose = Pose::new(
            Rotation::angle_axis(0.7, &V::new(0.6, 0.0, 0.8)).unwrap(),
            V::new(1.0, -2.0, 3.0),
        );
        let id = pose.compose(&pose.inverse());
        assert!((id.as_matrix() - Matrix4::identity()).norm() < 1e-10);
    }

    #[test]
    fn wedge6_layout() {
        let y = nalgebra::Vector6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let w = wedge6(&y);
        assert_eq!(w[(0, 1)], -3.0);
        assert_eq!(w[(1, 0)], 3.0);
        assert_eq!(w[(0, 3)], 4.0);
        assert_eq!(w[(2, 3)], 6.0);
        assert_eq!(w.row(3).iter().copied().sum::<f64>(), 0.0);
    }
}

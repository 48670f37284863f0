//! Unit-quaternion attitude chart.
//!
//! Quaternions are stored as a scalar part `q0` and vector part `q`, with
//! the Hamilton product and the body-to-inertial convention matching the
//! rotation matrices in [`crate::algebra`]: `to_rot` of a product equals
//! the product of the `to_rot`s. Both `Q` and `-Q` map to the same
//! rotation; [`UnitQuat::from_rot`] resolves the double cover by fixing
//! `q0 >= 0` (ties broken by the first nonzero vector component taken
//! positive), while the arithmetic itself never forces a sign so that
//! continuously evolving states do not jump sheets.

use nalgebra::{Matrix3, Vector3};

use crate::algebra::Rotation;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuat<T: Real> {
    pub q0: T,
    pub q: Vector3<T>,
}

impl<T: Real> UnitQuat<T> {
    pub fn identity() -> Self {
        UnitQuat {
            q0: T::one(),
            q: Vector3::zeros(),
        }
    }

    /// Builds a unit quaternion from unnormalized components.
    pub fn new_normalize(q0: T, q: Vector3<T>) -> Self {
        UnitQuat { q0, q }.normalized()
    }

    /// `|q0^2 + |q|^2 - 1|`, a cheap unit-ness diagnostic.
    pub fn norm_defect(&self) -> T {
        (self.q0 * self.q0 + self.q.norm_squared() - T::one()).abs()
    }

    pub fn normalized(&self) -> Self {
        let n = (self.q0 * self.q0 + self.q.norm_squared()).sqrt();
        UnitQuat {
            q0: self.q0 / n,
            q: self.q / n,
        }
    }

    /// Group inverse (conjugate for unit quaternions).
    pub fn inverse(&self) -> Self {
        UnitQuat {
            q0: self.q0,
            q: -self.q,
        }
    }

    /// Hamilton product, renormalized so that long products cannot drift
    /// off the unit sphere.
    pub fn mul(&self, other: &Self) -> Self {
        let q0 = self.q0 * other.q0 - self.q.dot(&other.q);
        let q = other.q * self.q0 + self.q * other.q0 + self.q.cross(&other.q);
        UnitQuat { q0, q }.normalized()
    }

    /// Rotation action `y = R(Q) x` evaluated without forming the matrix:
    /// `(q0^2 - |q|^2) x + 2 (q . x) q + 2 q0 (q x x)`.
    pub fn sandwich(&self, x: &Vector3<T>) -> Vector3<T> {
        let two = T::of(2.0);
        x * (self.q0 * self.q0 - self.q.norm_squared())
            + self.q * (two * self.q.dot(x))
            + self.q.cross(x) * (two * self.q0)
    }

    /// The corresponding rotation matrix
    /// `(q0^2 - |q|^2) I + 2 q q^T + 2 q0 skew(q)`.
    pub fn to_rot(&self) -> Rotation<T> {
        let two = T::of(2.0);
        let m = Matrix3::identity() * (self.q0 * self.q0 - self.q.norm_squared())
            + self.q * self.q.transpose() * two
            + crate::algebra::skew(&self.q) * (two * self.q0);
        Rotation::from_matrix_unchecked(m)
    }

    /// Inverse of [`to_rot`](Self::to_rot) with the sign convention
    /// described at the module level.
    ///
    /// Uses the largest of the four pivot candidates, so it stays
    /// accurate for rotations arbitrarily close to a half turn.
    pub fn from_rot(r: &Rotation<T>) -> Self {
        let m = r.matrix();
        let two = T::of(2.0);
        let t = m.trace();
        let q = if t > m[(0, 0)] && t > m[(1, 1)] && t > m[(2, 2)] {
            let s = two * (T::one() + t).sqrt(); // 4 q0
            UnitQuat {
                q0: s * T::of(0.25),
                q: Vector3::new(
                    (m[(2, 1)] - m[(1, 2)]) / s,
                    (m[(0, 2)] - m[(2, 0)]) / s,
                    (m[(1, 0)] - m[(0, 1)]) / s,
                ),
            }
        } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
            let s = two * (T::one() + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt(); // 4 qx
            UnitQuat {
                q0: (m[(2, 1)] - m[(1, 2)]) / s,
                q: Vector3::new(
                    s * T::of(0.25),
                    (m[(0, 1)] + m[(1, 0)]) / s,
                    (m[(0, 2)] + m[(2, 0)]) / s,
                ),
            }
        } else if m[(1, 1)] > m[(2, 2)] {
            let s = two * (T::one() + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt(); // 4 qy
            UnitQuat {
                q0: (m[(0, 2)] - m[(2, 0)]) / s,
                q: Vector3::new(
                    (m[(0, 1)] + m[(1, 0)]) / s,
                    s * T::of(0.25),
                    (m[(1, 2)] + m[(2, 1)]) / s,
                ),
            }
        } else {
            let s = two * (T::one() + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt(); // 4 qz
            UnitQuat {
                q0: (m[(1, 0)] - m[(0, 1)]) / s,
                q: Vector3::new(
                    (m[(0, 2)] + m[(2, 0)]) / s,
                    (m[(1, 2)] + m[(2, 1)]) / s,
                    s * T::of(0.25),
                ),
            }
        };
        q.normalized().canonicalized()
    }

    /// Resolves the double cover: `q0 > 0`, and for `q0 == 0` the first
    /// nonzero vector component is taken positive.
    pub fn canonicalized(&self) -> Self {
        let neg = if self.q0 < T::zero() {
            true
        } else if self.q0 > T::zero() {
            false
        } else {
            let mut sign = T::zero();
            for k in 0..3 {
                if self.q[k] != T::zero() {
                    sign = self.q[k];
                    break;
                }
            }
            sign < T::zero()
        };
        if neg {
            UnitQuat {
                q0: -self.q0,
                q: -self.q,
            }
        } else {
            *self
        }
    }

    /// Group increment by a rotation vector: the quaternion
    /// `[cos(|g|/2), sin(|g|/2) g/|g|]`, smooth through `g = 0`.
    ///
    /// `to_rot` of the result equals [`crate::algebra::so3_exp`] of `g`.
    pub fn exp(g: &Vector3<T>) -> Self {
        let a2 = g.norm_squared();
        let (q0, f) = if a2 < T::default_epsilon().sqrt() {
            // cos(a/2) and sin(a/2)/a to O(a^6)
            let q0 = T::one() - a2 / T::of(8.0) + a2 * a2 / T::of(384.0);
            let f = T::of(0.5) - a2 / T::of(48.0) + a2 * a2 / T::of(3840.0);
            (q0, f)
        } else {
            let a = a2.sqrt();
            let half = a * T::of(0.5);
            (half.cos(), half.sin() / a)
        };
        UnitQuat { q0, q: g * f }.normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::so3_exp;
    use nalgebra::Vector3;

    type V = Vector3<f64>;

    #[test]
    fn identity_roundtrip() {
        let q = UnitQuat::from_rot(&Rotation::<f64>::identity());
        assert_eq!(q.q0, 1.0);
        assert_eq!(q.q, V::zeros());
    }

    #[test]
    fn product_matches_rotation_composition() {
        let a = UnitQuat::exp(&V::new(0.4, -0.2, 0.9));
        let b = UnitQuat::exp(&V::new(-1.1, 0.3, 0.2));
        let lhs = a.mul(&b).to_rot();
        let rhs = a.to_rot().compose(&b.to_rot());
        assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-14);
    }

    #[test]
    fn sandwich_equals_matrix_action() {
        let q = UnitQuat::exp(&V::new(0.7, 0.1, -0.5));
        let x = V::new(2.0, -1.0, 0.25);
        assert!((q.sandwich(&x) - q.to_rot().act(&x)).norm() < 1e-14);
    }

    #[test]
    fn exp_matches_matrix_exponential() {
        for g in [V::new(1.5, -0.4, 2.0), V::new(1e-9, 2e-9, -1e-9)] {
            let lhs = UnitQuat::exp(&g).to_rot();
            let rhs = so3_exp(&g);
            assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-14);
        }
    }

    #[test]
    fn from_rot_fixes_scalar_sign() {
        // a rotation close to a half turn exercises the pivot branches
        let r = Rotation::angle_axis(3.14, &V::new(0.0, 0.6, 0.8)).unwrap();
        let q = UnitQuat::from_rot(&r);
        assert!(q.q0 >= 0.0);
        assert!((q.to_rot().matrix() - r.matrix()).norm() < 1e-13);
        // exact half turn about u: R = 2 u u^T - I is symmetric, so q0 is
        // exactly zero and the tie-break applies
        let u = V::new(0.0, 0.6, -0.8);
        let r = Rotation::try_new(u * u.transpose() * 2.0 - Matrix3::identity()).unwrap();
        let q = UnitQuat::from_rot(&r);
        assert_eq!(q.q0, 0.0);
        assert!(q.q.y > 0.0);
        assert!((q.q - u).norm() < 1e-15);
    }
}

//! Pose estimation on SE(3) with stochastic sensor models.
//!
//! The crate provides four layers, each usable on its own:
//!
//! * [`algebra`]: SO(3)/SE(3) primitives (skew/vex maps, projections,
//!   normalized distances, the angle-axis and Rodriguez charts).
//! * [`quat`]: the unit-quaternion double cover of SO(3) and the
//!   conversions between both attitude charts.
//! * [`sim`]: a deterministic rigid-body truth integrator plus a seeded
//!   generator of biased, noisy body-frame measurements (angular/linear
//!   velocity, direction vectors, landmark positions).
//! * [`wahba`] and [`filters`]: batch least-squares pose reconstruction
//!   from one measurement frame, and two nonlinear stochastic pose
//!   observers (one driven by the reconstructed pose, one driven by the
//!   vector measurements directly). Both observers come in a
//!   rotation-matrix and a unit-quaternion form that track each other to
//!   numerical precision.
//!
//! All core types are generic over the scalar through the [`Real`] trait;
//! `f64` aliases are exported at the crate root and are what the
//! simulation harness uses.
//!
//! ```
//! use liepose::{Rotation, Vec3};
//!
//! let r = Rotation::angle_axis(0.3, &Vec3::z()).unwrap();
//! let e = r.dist_identity();
//! assert!(e > 0.0 && e < 1.0);
//! ```

pub mod algebra;
pub mod filters;
pub mod quat;
pub mod sim;
pub mod wahba;

use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Scalar types the library is generic over.
///
/// `f64` is the primary instantiation; `f32` is supported with loosened
/// validity tolerances. The associated constants scale the internal
/// consistency checks to the precision of the type.
pub trait Real: Copy + nalgebra::RealField + FloatConst + FromPrimitive + ToPrimitive {
    /// Max-norm tolerance on the Gram defect `R^T R - I` (and on axis
    /// normalization) above which a matrix is rejected as a rotation.
    const GRAM_TOL: Self;
    /// Max-norm tolerance on the symmetric part above which `vex`
    /// rejects its input as not antisymmetric.
    const VEX_TOL: Self;

    /// Shorthand conversion from an `f64` literal.
    ///
    /// Panics if the value is not representable, which for the provided
    /// impls it always is.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal must be representable in the scalar type")
    }
}

impl Real for f64 {
    const GRAM_TOL: Self = 1e-9;
    const VEX_TOL: Self = 1e-6;
}

impl Real for f32 {
    const GRAM_TOL: Self = 1e-4;
    const VEX_TOL: Self = 1e-3;
}

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Vec6 = nalgebra::Vector6<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type Mat4 = nalgebra::Matrix4<f64>;
pub type Rotation = algebra::Rotation<f64>;
pub type Pose = algebra::Pose<f64>;
pub type UnitQuat = quat::UnitQuat<f64>;

pub type Vec3F32 = nalgebra::Vector3<f32>;
pub type Mat3F32 = nalgebra::Matrix3<f32>;
pub type RotationF32 = algebra::Rotation<f32>;
pub type PoseF32 = algebra::Pose<f32>;
pub type UnitQuatF32 = quat::UnitQuat<f32>;

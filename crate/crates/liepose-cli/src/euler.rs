//! Intrinsic Z-Y-X (yaw, pitch, roll) Euler angles for trace display.
//! Display-only: no estimator math runs through this chart.

use liepose::{Rotation, Vec3};

/// Pitch magnitude (rad) beyond which the extraction is treated as
/// gimbal-locked and the row is flagged.
const LOCK_MARGIN: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerZyx {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    /// Set when pitch is within [`LOCK_MARGIN`] of +-90 degrees; yaw and
    /// roll are then not separately observable and roll is reported as 0.
    pub gimbal: bool,
}

/// Extracts angles such that `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.
pub fn euler_zyx(r: &Rotation) -> EulerZyx {
    let m = r.matrix();
    let s = (-m[(2, 0)]).clamp(-1.0, 1.0);
    let pitch = s.asin();
    if 1.0 - s.abs() < LOCK_MARGIN {
        // Only yaw -+ roll is determined; attribute everything to yaw.
        EulerZyx {
            yaw: f64::atan2(-m[(0, 1)], m[(1, 1)]),
            pitch,
            roll: 0.0,
            gimbal: true,
        }
    } else {
        EulerZyx {
            yaw: f64::atan2(m[(1, 0)], m[(0, 0)]),
            pitch,
            roll: f64::atan2(m[(2, 1)], m[(2, 2)]),
            gimbal: false,
        }
    }
}

/// Rebuilds the rotation `Rz(yaw) * Ry(pitch) * Rx(roll)`.
pub fn from_euler_zyx(yaw: f64, pitch: f64, roll: f64) -> Rotation {
    let rz = Rotation::angle_axis(yaw, &Vec3::z()).expect("unit axis");
    let ry = Rotation::angle_axis(pitch, &Vec3::y()).expect("unit axis");
    let rx = Rotation::angle_axis(roll, &Vec3::x()).expect("unit axis");
    rz.compose(&ry).compose(&rx)
}

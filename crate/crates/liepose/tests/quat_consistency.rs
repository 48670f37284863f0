//! Agreement between the unit-quaternion chart and the rotation-matrix chart.

mod common;

use common::{max_abs, rand_rotation, rand_vec, rng};
use liepose::quat::UnitQuat;
use liepose::{Rotation, Vec3};

const TRIALS: usize = 1000;

#[test]
fn matrix_roundtrip() {
    let mut rng = rng(21);
    for _ in 0..TRIALS {
        let r = rand_rotation(&mut rng);
        let q = UnitQuat::from_rot(&r);
        assert!(max_abs(&(q.to_rot().matrix() - r.matrix())) < 1e-9);
        assert!(q.q0 >= 0.0);
        assert!(q.norm_defect() < 1e-12);
    }
}

#[test]
fn product_matches_composition() {
    let mut rng = rng(22);
    for _ in 0..TRIALS {
        let a = rand_rotation(&mut rng);
        let b = rand_rotation(&mut rng);
        let qa = UnitQuat::from_rot(&a);
        let qb = UnitQuat::from_rot(&b);
        let prod = qa.mul(&qb);
        assert!(max_abs(&(prod.to_rot().matrix() - a.compose(&b).matrix())) < 1e-12);
    }
}

#[test]
fn sandwich_matches_rotation_action() {
    let mut rng = rng(23);
    for _ in 0..TRIALS {
        let r = rand_rotation(&mut rng);
        let q = UnitQuat::from_rot(&r);
        let x = rand_vec(&mut rng, 5.0);
        assert!((q.sandwich(&x) - r.act(&x)).norm() < 1e-12);
    }
}

#[test]
fn inverse_is_conjugate() {
    let mut rng = rng(24);
    for _ in 0..TRIALS {
        let q = UnitQuat::from_rot(&rand_rotation(&mut rng));
        let e = q.mul(&q.inverse());
        assert!((e.q0 - 1.0).abs() < 1e-12 && e.q.norm() < 1e-12);
    }
}

#[test]
fn exp_matches_matrix_exp() {
    let mut rng = rng(25);
    for _ in 0..TRIALS {
        let g = rand_vec(&mut rng, 2.0);
        let qe = UnitQuat::exp(&g);
        let re = liepose::algebra::so3_exp(&g);
        assert!(max_abs(&(qe.to_rot().matrix() - re.matrix())) < 1e-12);
    }
    // small-angle branch
    for scale in [1e-6, 1e-9, 0.0] {
        let g = Vec3::new(scale, -scale, 0.5 * scale);
        let qe = UnitQuat::exp(&g);
        let re = liepose::algebra::so3_exp(&g);
        assert!(max_abs(&(qe.to_rot().matrix() - re.matrix())) < 1e-15);
        assert!(qe.norm_defect() < 1e-15);
    }
}

#[test]
fn half_turn_about_z() {
    let r = Rotation::angle_axis(std::f64::consts::PI, &Vec3::z()).unwrap();
    let q = UnitQuat::from_rot(&r);
    assert!(q.q0.abs() < 1e-12);
    assert!((q.q - Vec3::z()).norm() < 1e-12);
}

#[test]
fn scalar_part_tracks_distance() {
    // 1 - q0^2 equals the matrix distance to identity
    let mut rng = rng(26);
    for _ in 0..TRIALS {
        let r = rand_rotation(&mut rng);
        let q = UnitQuat::from_rot(&r);
        assert!((1.0 - q.q0 * q.q0 - r.dist_identity()).abs() < 1e-12);
    }
}

#[test]
fn canonical_sign_survives_products() {
    // arithmetic must not force a sign; only from_rot canonicalizes
    let mut rng = rng(27);
    let mut saw_negative = false;
    for _ in 0..TRIALS {
        let qa = UnitQuat::from_rot(&rand_rotation(&mut rng));
        let qb = UnitQuat::from_rot(&rand_rotation(&mut rng));
        if qa.mul(&qb).q0 < 0.0 {
            saw_negative = true;
        }
    }
    assert!(saw_negative, "products never left the upper hemisphere");
}

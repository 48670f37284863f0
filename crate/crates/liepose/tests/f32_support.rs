//! Single-precision instantiation smoke test. The crate is generic over
//! the scalar; this exercises every layer at `f32` with tolerances scaled
//! to that precision to make sure nothing silently assumes `f64`.

use liepose::filters::{direct_step, semi_direct_step, FilterState, Gains};
use liepose::sim::{reference_profile, NoiseModel, NoiseScaling, Scene, Simulator};
use liepose::wahba::reconstruct_pose;
use liepose::{Mat3F32, RotationF32, UnitQuatF32, Vec3F32};

fn scene() -> Scene<f32> {
    Scene {
        inertial_vectors: vec![
            Vec3F32::new(1.0, -1.0, 1.0) / 3.0_f32.sqrt(),
            Vec3F32::new(0.0, 0.0, 1.0),
        ],
        augment: true,
        weights_vectors: vec![1.0, 1.0, 1.0],
        landmarks: vec![Vec3F32::new(0.5, 2.0_f32.sqrt(), 1.0)],
        weights_landmarks: vec![1.0],
    }
}

#[test]
fn algebra_and_quat_roundtrips() {
    let axis = Vec3F32::new(2.0, -1.0, 0.5).normalize();
    let r = RotationF32::angle_axis(1.1, &axis).unwrap();
    let q = UnitQuatF32::from_rot(&r);
    let back = q.to_rot();
    let diff = r.matrix() - back.matrix();
    assert!(diff.iter().all(|x| x.abs() < 1e-5));

    let m: Mat3F32 = *r.matrix();
    let gram = m.transpose() * m - Mat3F32::identity();
    assert!(gram.iter().all(|x| x.abs() < 1e-5));
}

#[test]
fn filters_converge_from_moderate_error() {
    let dt = 1e-3_f32;
    let noise = NoiseModel::zero(2, 1);
    for direct in [false, true] {
        let mut sim = Simulator::new(
            scene(),
            noise.clone(),
            reference_profile::<f32>(),
            NoiseScaling::PerSample,
            1e-3,
            3,
        )
        .unwrap();

        let axis = Vec3F32::new(1.0, 2.0, -1.0).normalize();
        let rot0 = RotationF32::angle_axis(0.8, &axis).unwrap();
        let mut state = FilterState::new(rot0, Vec3F32::new(2.0, -1.0, 1.5));
        let g = Gains::new(8.0_f32, 1.0, 1.0, 0.1, 0.1, 0.2).unwrap();

        for _ in 0..16_000 {
            let frame = sim.measure().unwrap();
            state = if direct {
                direct_step(&state, &frame, &g, dt).unwrap().state
            } else {
                let pose = reconstruct_pose(&frame).unwrap();
                semi_direct_step(&state, &frame, &pose, &g, dt)
                    .unwrap()
                    .state
            };
            sim.advance().unwrap();
        }

        let truth = sim.truth().pose;
        let e_r = state
            .rot
            .compose(&truth.rotation.transpose())
            .dist_identity();
        let e_p = (state.p_hat - truth.position).norm();
        assert!(
            e_r < 1e-3 && e_p < 5e-2,
            "direct={direct}: e_r={e_r:.3e}, e_p={e_p:.3e}"
        );
        assert!(state.sigma_hat.iter().all(|x| x.is_finite()));
    }
}

//! Central finite differences along the integrated flow against the analytic
//! Lie derivatives.

mod common;

use common::fd::{compare, random_control, Scene};
use inspect_rta::constraints::{
    hocbf_compose, lie_derivatives, value, ConstraintContext, ConstraintId, SafetyModel, SafetyParams,
};
use inspect_rta::dynamics::{
    AttitudeState, DeputyState, PhysicalConstants, Quat, ResourceState, SunState, TranslationalState, Vec3,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn analytic_rates_match_finite_differences() {
    let c = PhysicalConstants::default();
    let model = SafetyModel::new(SafetyParams::default(), c);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..40 {
        let scene = Scene::random(&mut rng);
        let u = random_control(&mut rng, &c);
        for cmp in compare(&model, &scene, &u) {
            assert!(
                cmp.error < 1e-4,
                "{}: analytic {} numeric {} (rel {})",
                cmp.id,
                cmp.analytic,
                cmp.numeric,
                cmp.error
            );
            checked += 1;
        }
    }
    assert!(checked > 400, "only {checked} rows checked");
}

#[test]
fn velocity_box_gradient_maps_body_force() {
    let c = PhysicalConstants::default();
    let model = SafetyModel::new(SafetyParams::default(), c);
    let s = DeputyState {
        trans: TranslationalState {
            p: Vec3::new(100.0, 0.0, 0.0),
            v: Vec3::new(1.0, 0.0, 0.0),
        },
        ..Default::default()
    };
    let ctx = ConstraintContext::new(&model, &s, &[], SunState::new(0.0));
    let d = lie_derivatives(&model.spec(ConstraintId::VelX), &ctx, 1).unwrap();
    assert!((d.lg[0] + 2.0 / 12.0).abs() < 1e-15);
    assert_eq!(&d.lg[1..], &[0.0; 5]);
    assert!(value(ConstraintId::VelX, &ctx) > 0.0);
}

#[test]
fn exclusion_zone_row_acts_through_torque() {
    let c = PhysicalConstants::default();
    let model = SafetyModel::new(SafetyParams::default(), c);
    let s = DeputyState {
        trans: TranslationalState {
            p: Vec3::new(100.0, 0.0, 0.0),
            v: Vec3::zeros(),
        },
        att: AttitudeState {
            q: Quat::from_axis_angle(&Vec3::z(), 1.0),
            omega: Vec3::new(0.0, 0.0, 0.01),
        },
        res: ResourceState {
            energy: 5000.0,
            temperature: 0.0,
        },
    };
    let ctx = ConstraintContext::new(&model, &s, &[], SunState::new(0.0));
    let row = hocbf_compose(&model.spec(ConstraintId::Ez), &ctx).unwrap();
    assert_eq!(&row.lg[..3], &[0.0; 3]);
    assert!(row.lg[5].abs() > 0.0);
}

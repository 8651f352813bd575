//! Coverage of the chief by a single deputy parked on a slow circle, with the
//! Sun sweeping past.

use inspect_rta::dynamics::{AttitudeState, DeputyState, PhysicalConstants, Quat, SunState, TranslationalState, Vec3};
use inspect_rta::inspection::{nearest_uninspected_cluster, InspectionSphere, SensorModel};

fn pointing_at_chief(p: Vec3) -> Quat {
    let target = -p.normalize();
    let axis = Vec3::x().cross(&target);
    let angle = axis.norm().atan2(Vec3::x().dot(&target));
    if axis.norm() < 1e-12 {
        Quat::from_axis_angle(&Vec3::z(), angle)
    } else {
        Quat::from_axis_angle(&axis.normalize(), angle)
    }
}

fn main() {
    let c = PhysicalConstants::default();
    let mut sphere = InspectionSphere::with_priority(Vec3::new(1.0, 0.0, 0.0));
    let sensor = SensorModel::default();
    let mut sun = SunState::new(0.0);
    let radius = 40.0;

    for t in 0..3000 {
        let phase = t as f64 * 2e-3;
        let p = Vec3::new(phase.cos(), phase.sin(), 0.3 * (3.0 * phase).sin()).normalize() * radius;
        let deputy = DeputyState {
            trans: TranslationalState { p, v: Vec3::zeros() },
            att: AttitudeState {
                q: pointing_at_chief(p),
                omega: Vec3::zeros(),
            },
            ..Default::default()
        };
        let credit = sphere.inspect_step(&[deputy], &sun, &sensor);
        if !credit[0].is_empty() || t % 500 == 0 {
            let next = nearest_uninspected_cluster(&sphere, &deputy, 0);
            println!(
                "t={t:>4}  +{:>2} points  weight {:.3}  remaining {:>3}  next cluster {:.2?}",
                credit[0].len(),
                sphere.inspected_weight(),
                sphere.uninspected_count(),
                next.as_slice()
            );
        }
        sun = sun.advance(1.0, &c);
    }
}

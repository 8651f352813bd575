//! The same three-agent scene encoded in every observation mode.

use inspect_rta::dynamics::{AttitudeState, DeputyState, Quat, ResourceState, SunState, TranslationalState, Vec3};
use inspect_rta::inspection::InspectionSphere;
use inspect_rta::observation::{encode, ObservationConfig, ObservationMode, BASE_LEN};

fn deputy(p: Vec3) -> DeputyState {
    DeputyState {
        trans: TranslationalState {
            p,
            v: Vec3::new(0.0, -0.1, 0.0),
        },
        att: AttitudeState {
            q: Quat::from_axis_angle(&Vec3::z(), 0.5),
            omega: Vec3::zeros(),
        },
        res: ResourceState {
            energy: 5000.0,
            temperature: 2.0,
        },
    }
}

fn main() {
    let me = deputy(Vec3::new(60.0, 10.0, 0.0));
    let others = [
        deputy(Vec3::new(80.0, 40.0, 5.0)),
        deputy(Vec3::new(20.0, -30.0, -10.0)),
    ];
    let sphere = InspectionSphere::with_priority(Vec3::new(0.0, 1.0, 0.0));
    let sun = SunState::new(0.7);

    for mode in ObservationMode::ALL {
        let obs = encode(&me, &others, &sun, &sphere, 0, &ObservationConfig::new(mode));
        let scalable: Vec<String> = obs[BASE_LEN..]
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(k, x)| format!("[{k}]={x:.4}"))
            .collect();
        println!(
            "{:<13} len {:>3}  occupied {}",
            mode.as_str(),
            obs.len(),
            scalable.join(" ")
        );
    }
    let base = encode(&me, &[], &sun, &sphere, 0, &ObservationConfig::default());
    println!("base block {:.3?}", base);
}

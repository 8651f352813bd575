//! Free drift over one orbit: RK4 against the closed-form CWH solution, plus
//! the attitude and resource states riding along.

use inspect_rta::dynamics::{
    cwh_closed_form, step, AttitudeState, ControlInput, DeputyState, PhysicalConstants, Quat, ResourceState, SunState,
    TranslationalState, Vec3,
};

fn main() {
    let c = PhysicalConstants::default();
    let trans = TranslationalState {
        p: Vec3::new(100.0, -50.0, 20.0),
        v: Vec3::new(0.01, -0.2, 0.0),
    };
    let mut s = DeputyState {
        trans,
        att: AttitudeState {
            q: Quat::from_axis_angle(&Vec3::new(0.0, 0.0, 1.0), 0.3),
            omega: Vec3::new(0.0, 0.001, 0.002),
        },
        res: ResourceState {
            energy: 5000.0,
            temperature: 0.0,
        },
    };
    let mut sun = SunState::new(0.0);
    let period = c.period().round() as usize;

    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>12} {:>9} {:>8}",
        "t", "x", "y", "z", "|err| m", "E kJ", "T C"
    );
    for k in 1..=period {
        s = step(&s, &ControlInput::ZERO, &sun, 1.0, &c).expect("finite state");
        sun = sun.advance(1.0, &c);
        if k % 600 == 0 || k == period {
            let exact = cwh_closed_form(&trans, k as f64, c.mean_motion);
            let err = (s.trans.p - exact.p).norm();
            println!(
                "{k:>6} {:>10.3} {:>10.3} {:>10.3} {err:>12.3e} {:>9.3} {:>8.3}",
                s.trans.p.x,
                s.trans.p.y,
                s.trans.p.z,
                s.res.energy / 1000.0,
                s.res.temperature
            );
        }
    }
    println!(
        "|q| - 1 = {:.1e}, omega = {:?}",
        s.att.q.norm() - 1.0,
        s.att.omega.as_slice()
    );
}

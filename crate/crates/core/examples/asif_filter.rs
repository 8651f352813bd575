//! One deputy closing on the chief at full thrust. The filter leaves the
//! command alone while far away and brakes as the collision margin shrinks.

use inspect_rta::asif::{filter, FilterConfig};
use inspect_rta::constraints::{h_chief, ConstraintContext, SafetyModel, SafetyParams};
use inspect_rta::dynamics::{
    step, AttitudeState, ControlInput, DeputyState, PhysicalConstants, Quat, ResourceState, SunState,
    TranslationalState, Vec3,
};

fn main() {
    let c = PhysicalConstants::default();
    let nominal = SafetyModel::new(SafetyParams::default(), c);
    let model = nominal.tightened();
    let cfg = FilterConfig::new(&model);
    let mut sun = SunState::new(1.0);
    // boresight towards the chief, body x = Hill -x
    let mut s = DeputyState {
        trans: TranslationalState {
            p: Vec3::new(120.0, 0.0, 0.0),
            v: Vec3::new(-0.3, 0.0, 0.0),
        },
        att: AttitudeState {
            q: Quat::from_axis_angle(&Vec3::z(), std::f64::consts::PI),
            omega: Vec3::zeros(),
        },
        res: ResourceState {
            energy: 5000.0,
            temperature: 0.0,
        },
    };
    let u_des = ControlInput::new(Vec3::new(1.0, 0.0, 0.0), Vec3::zeros());

    let mut min_h = f64::INFINITY;
    let mut closest = f64::INFINITY;
    for t in 0..400 {
        let ctx = ConstraintContext::new(&model, &s, &[], sun);
        let r = filter(&u_des, &ctx, &cfg);
        let h = h_chief(&ConstraintContext::new(&nominal, &s, &[], sun));
        min_h = min_h.min(h);
        closest = closest.min(s.trans.p.norm());
        if t % 20 == 0 {
            println!(
                "t={t:>3} r={:>7.2} m  v_r={:>6.3} m/s  h_chief={h:>7.3}  stage={:?}  Fx={:>6.3}",
                s.trans.p.norm(),
                s.trans.v.dot(&s.trans.p) / s.trans.p.norm(),
                r.stage,
                r.u_act.force.x
            );
        }
        s = step(&s, &r.u_act, &sun, 1.0, &c).expect("finite state");
        sun = sun.advance(1.0, &c);
    }
    println!("closest approach {closest:.2} m, smallest h_chief {min_h:.4}");
}

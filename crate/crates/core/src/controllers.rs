//! Scripted primary controllers. They produce the desired control `u_des`
//! that the safety filter then adjusts.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{cwh_drift_accel, ControlInput, DeputyState, PhysicalConstants, SunState, Vec3};
use crate::inspection::{nearest_uninspected_cluster, InspectionSphere};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    InspectSeeker,
    Random,
    Adversarial,
    Zero,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] = [
        ControllerKind::InspectSeeker,
        ControllerKind::Random,
        ControllerKind::Adversarial,
        ControllerKind::Zero,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerKind::InspectSeeker => "inspect-seeker",
            ControllerKind::Random => "random",
            ControllerKind::Adversarial => "adversarial",
            ControllerKind::Zero => "zero",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ControllerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown controller `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    /// N/m
    pub position_kp: f64,
    /// N·s/m
    pub position_kd: f64,
    /// N·m/rad
    pub attitude_kp: f64,
    /// N·m·s/rad
    pub attitude_kd: f64,
    /// Distance from the chief's center of the inspection setpoint, m.
    pub standoff: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Gains {
            position_kp: 0.02,
            position_kd: 0.4,
            attitude_kp: 2e-4,
            attitude_kd: 4e-3,
            standoff: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    pub gains: Gains,
    pub seed: u64,
}

impl ControllerSpec {
    pub fn new(kind: ControllerKind, seed: u64) -> Self {
        ControllerSpec {
            kind,
            gains: Gains::default(),
            seed,
        }
    }

    pub fn command(&self, view: &AgentView) -> ControlInput {
        match self.kind {
            ControllerKind::InspectSeeker => inspect_seeker(view, &self.gains),
            ControllerKind::Random => random_controller(self.seed, view.agent, view.step, view.constants),
            ControllerKind::Adversarial => adversarial_controller(view),
            ControllerKind::Zero => ControlInput::ZERO,
        }
    }
}

/// What a controller may look at when choosing its command.
#[derive(Debug, Clone, Copy)]
pub struct AgentView<'a> {
    pub agent: usize,
    /// Index of the 10 s control step.
    pub step: u64,
    pub state: &'a DeputyState,
    pub others: &'a [(usize, DeputyState)],
    pub sphere: &'a InspectionSphere,
    pub sun: SunState,
    pub constants: &'a PhysicalConstants,
    pub cluster_seed: u64,
}

fn clip(v: Vec3, limit: f64) -> Vec3 {
    v.map(|x| x.clamp(-limit, limit))
}

/// Body-frame rotation axis times angle taking the body x axis onto the
/// body-frame direction `target`. A target exactly behind uses the body z
/// axis.
fn pointing_error(target_body: &Vec3) -> Vec3 {
    let x = Vec3::x();
    let t = target_body.normalize();
    let axis = x.cross(&t);
    let s = axis.norm();
    let angle = s.atan2(x.dot(&t));
    if s < 1e-12 {
        if x.dot(&t) > 0.0 {
            Vec3::zeros()
        } else {
            Vec3::z() * angle
        }
    } else {
        axis * (angle / s)
    }
}

/// PD on position towards a standoff point above the nearest uninspected
/// cluster, PD on attitude pointing the sensor at the chief.
pub fn inspect_seeker(view: &AgentView, gains: &Gains) -> ControlInput {
    let s = view.state;
    let c = view.constants;
    let p = s.trans.p;
    let v = s.trans.v;
    let q = &s.att.q;
    let r = p.norm();

    let dir = nearest_uninspected_cluster(view.sphere, s, view.cluster_seed);
    let goal = if dir.norm() > 0.0 {
        dir * gains.standoff
    } else if r > 0.0 {
        p * (gains.standoff.max(r) / r)
    } else {
        p
    };
    let f_hill =
        (goal - p) * gains.position_kp - v * gains.position_kd - cwh_drift_accel(&p, &v, c.mean_motion) * c.mass;
    let force = clip(q.rotate_inverse(&f_hill), c.thrust_max);

    let torque = if r > 0.0 {
        let target = q.rotate_inverse(&(-p / r));
        let err = pointing_error(&target);
        err * gains.attitude_kp - s.att.omega * gains.attitude_kd
    } else {
        -s.att.omega * gains.attitude_kd
    };
    ControlInput::new(force, clip(torque, c.torque_max))
}

/// Every channel uniform in its box, drawn from a stream keyed by
/// `(seed, agent, step)`.
pub fn random_controller(seed: u64, agent: usize, step: u64, c: &PhysicalConstants) -> ControlInput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((agent as u64) << 40) ^ step);
    let mut u = [0.0; 6];
    for (k, x) in u.iter_mut().enumerate() {
        let lim = if k < 3 { c.thrust_max } else { c.torque_max };
        *x = rng.gen_range(-lim..=lim);
    }
    ControlInput::from_array(u)
}

/// Full thrust at the chief on even steps and at the nearest other deputy on
/// odd steps, full torque towards pointing the sensor at the Sun.
pub fn adversarial_controller(view: &AgentView) -> ControlInput {
    let s = view.state;
    let c = view.constants;
    let q = &s.att.q;
    let p = s.trans.p;
    let nearest = view
        .others
        .iter()
        .map(|(_, o)| o.trans.p - p)
        .min_by(|a, b| a.norm().total_cmp(&b.norm()));
    let toward = match nearest {
        Some(d) if view.step % 2 == 1 => d,
        _ => -p,
    };
    let force = scale_to_box(&q.rotate_inverse(&toward), c.thrust_max);
    let err = pointing_error(&q.rotate_inverse(&view.sun.vector()));
    let torque = scale_to_box(&err, c.torque_max);
    ControlInput::new(force, torque)
}

/// Scales `v` so its largest component has magnitude `limit`.
fn scale_to_box(v: &Vec3, limit: f64) -> Vec3 {
    let m = v.amax();
    if m == 0.0 {
        Vec3::zeros()
    } else {
        v * (limit / m)
    }
}

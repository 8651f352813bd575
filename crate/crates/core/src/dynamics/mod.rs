//! Translational (CWH), attitude, thermal, power and Sun models for a deputy,
//! plus the fixed-step RK4 integrator that couples them.

mod cwh;
mod quat;

pub use cwh::{cwh_closed_form, ClosestApproach, DriftGrid, Transition};
pub use quat::{body_to_hill, hill_to_body, Quat, UNIT_TOLERANCE};

use nalgebra::{SVector, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

const KELVIN_OFFSET: f64 = 273.15;

/// Nadir direction (towards Earth) in Hill's frame.
pub const EARTH_DIRECTION: Vec3 = Vec3::new(-1.0, 0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TranslationalState {
    /// Position in Hill's frame, m.
    pub p: Vec3,
    /// Velocity in Hill's frame, m/s.
    pub v: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AttitudeState {
    pub q: Quat,
    /// Body rates about the principal axes, rad/s.
    pub omega: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResourceState {
    /// Battery energy, J.
    pub energy: f64,
    /// Thermal node temperature, °C.
    pub temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DeputyState {
    pub trans: TranslationalState,
    pub att: AttitudeState,
    pub res: ResourceState,
}

impl DeputyState {
    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|x| x.is_finite())
    }

    pub(crate) fn to_vector(&self) -> SVector<f64, 15> {
        let mut x = SVector::<f64, 15>::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&self.trans.p);
        x.fixed_rows_mut::<3>(3).copy_from(&self.trans.v);
        for (i, c) in self.att.q.0.iter().enumerate() {
            x[6 + i] = *c;
        }
        x.fixed_rows_mut::<3>(10).copy_from(&self.att.omega);
        x[13] = self.res.energy;
        x[14] = self.res.temperature;
        x
    }

    pub(crate) fn from_vector(x: &SVector<f64, 15>) -> Self {
        DeputyState {
            trans: TranslationalState {
                p: x.fixed_rows::<3>(0).into(),
                v: x.fixed_rows::<3>(3).into(),
            },
            att: AttitudeState {
                q: Quat([x[6], x[7], x[8], x[9]]),
                omega: x.fixed_rows::<3>(10).into(),
            },
            res: ResourceState {
                energy: x[13],
                temperature: x[14],
            },
        }
    }
}

/// Body-frame thrust (N) and body-axis torque (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub force: Vec3,
    pub torque: Vec3,
}

impl ControlInput {
    pub const ZERO: ControlInput = ControlInput {
        force: Vec3::new(0.0, 0.0, 0.0),
        torque: Vec3::new(0.0, 0.0, 0.0),
    };

    pub fn new(force: Vec3, torque: Vec3) -> Self {
        ControlInput { force, torque }
    }

    pub fn from_array(u: [f64; 6]) -> Self {
        ControlInput {
            force: Vec3::new(u[0], u[1], u[2]),
            torque: Vec3::new(u[3], u[4], u[5]),
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.force.x,
            self.force.y,
            self.force.z,
            self.torque.x,
            self.torque.y,
            self.torque.z,
        ]
    }

    pub fn is_within(&self, c: &PhysicalConstants) -> bool {
        self.force.iter().all(|f| f.abs() <= c.thrust_max) && self.torque.iter().all(|t| t.abs() <= c.torque_max)
    }

    pub fn clamped(&self, c: &PhysicalConstants) -> Self {
        ControlInput {
            force: self.force.map(|f| f.clamp(-c.thrust_max, c.thrust_max)),
            torque: self.torque.map(|t| t.clamp(-c.torque_max, c.torque_max)),
        }
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &ControlInput) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Sun angle in Hill's x-y plane, kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SunState {
    pub theta: f64,
}

impl SunState {
    pub fn new(theta: f64) -> Self {
        SunState {
            theta: wrap_angle(theta),
        }
    }

    /// Unit vector from the chief towards the Sun.
    pub fn vector(&self) -> Vec3 {
        let (s, c) = self.theta.sin_cos();
        Vec3::new(c, s, 0.0)
    }

    /// The Sun rotates at `-n` in Hill's frame.
    pub fn advance(&self, dt: f64, c: &PhysicalConstants) -> SunState {
        SunState::new(self.theta - c.mean_motion * dt)
    }
}

pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub fn sun_vector(sun: &SunState) -> Vec3 {
    sun.vector()
}

pub fn sun_advance(sun: &SunState, dt: f64, c: &PhysicalConstants) -> SunState {
    sun.advance(dt, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalNode {
    pub mass: f64,
    pub area: f64,
    pub specific_heat: f64,
    pub absorptivity: f64,
    pub emissivity: f64,
    pub normal_body: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolarPanel {
    pub ideal_performance: f64,
    pub degradation: f64,
    pub area: f64,
    pub normal_body: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub mass: f64,
    pub mean_motion: f64,
    pub thrust_max: f64,
    /// Principal moments of inertia, kg·m².
    pub inertia: Vec3,
    pub torque_max: f64,
    pub solar_constant: f64,
    pub albedo_factor: f64,
    pub stefan_boltzmann: f64,
    /// Mean Earth temperature, K.
    pub earth_temperature: f64,
    pub node: ThermalNode,
    pub panel: SolarPanel,
    pub power_out: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            mass: 12.0,
            mean_motion: 0.001027,
            thrust_max: 1.0,
            inertia: Vec3::new(0.0573, 0.0573, 0.0573),
            torque_max: 0.001,
            solar_constant: 1367.0,
            albedo_factor: 0.27,
            stefan_boltzmann: 5.67051e-8,
            earth_temperature: 255.0,
            node: ThermalNode {
                mass: 2.0,
                area: 0.03,
                specific_heat: 900.0,
                absorptivity: 0.13,
                emissivity: 0.06,
                normal_body: Vec3::new(0.0, -1.0, 0.0),
            },
            panel: SolarPanel {
                ideal_performance: 983.3,
                degradation: 0.77,
                area: 0.06,
                normal_body: Vec3::new(-1.0, 0.0, 0.0),
            },
            power_out: 15.0,
        }
    }
}

impl PhysicalConstants {
    /// Orbital period `2π/n`, s.
    pub fn period(&self) -> f64 {
        TAU / self.mean_motion
    }

    /// Maximum guaranteed acceleration in any direction, `F_max / m`.
    pub fn accel_max(&self) -> f64 {
        self.thrust_max / self.mass
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("mean_motion", self.mean_motion),
            ("thrust_max", self.thrust_max),
            ("torque_max", self.torque_max),
            ("inertia", self.inertia.min()),
            ("node_mass", self.node.mass),
            ("node_area", self.node.area),
            ("node_specific_heat", self.node.specific_heat),
            ("panel_area", self.panel.area),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, "must be positive"));
            }
        }
        let unit = [
            ("node_normal", self.node.normal_body),
            ("panel_normal", self.panel.normal_body),
        ];
        for (field, v) in unit {
            if (v.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::config(field, "must be a unit vector"));
            }
        }
        Ok(())
    }
}

/// Unforced CWH acceleration.
pub fn cwh_drift_accel(p: &Vec3, v: &Vec3, n: f64) -> Vec3 {
    Vec3::new(3.0 * n * n * p.x + 2.0 * n * v.y, -2.0 * n * v.x, -n * n * p.z)
}

/// `[ṗ, v̇]` for a Hill-frame force.
pub fn cwh_derivative(s: &TranslationalState, force_hill: &Vec3, c: &PhysicalConstants) -> SVector<f64, 6> {
    let a = cwh_drift_accel(&s.p, &s.v, c.mean_motion) + force_hill / c.mass;
    SVector::<f64, 6>::new(s.v.x, s.v.y, s.v.z, a.x, a.y, a.z)
}

/// Euler's equations for a rigid body with principal inertia `j`.
pub fn euler_rate(omega: &Vec3, torque: &Vec3, j: &Vec3) -> Vec3 {
    Vec3::new(
        ((j.y - j.z) * omega.y * omega.z + torque.x) / j.x,
        ((j.z - j.x) * omega.x * omega.z + torque.y) / j.y,
        ((j.x - j.y) * omega.x * omega.y + torque.z) / j.z,
    )
}

/// `[q̇, ω̇]` (7 entries).
pub fn attitude_derivative(s: &AttitudeState, torque: &Vec3, c: &PhysicalConstants) -> Result<SVector<f64, 7>> {
    s.q.check_unit()?;
    Ok(attitude_rate_unchecked(s, torque, c))
}

fn attitude_rate_unchecked(s: &AttitudeState, torque: &Vec3, c: &PhysicalConstants) -> SVector<f64, 7> {
    let dq = s.q.xi_times(&s.omega);
    let dw = euler_rate(&s.omega, torque, &c.inertia);
    SVector::<f64, 7>::from_column_slice(&[0.5 * dq[0], 0.5 * dq[1], 0.5 * dq[2], 0.5 * dq[3], dw.x, dw.y, dw.z])
}

/// Heat-flow breakdown for the thermal node, W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatFlow {
    pub solar: f64,
    pub albedo: f64,
    pub infrared: f64,
    pub rejected: f64,
}

impl HeatFlow {
    pub fn total(&self) -> f64 {
        self.solar + self.albedo + self.infrared - self.rejected
    }
}

/// Albedo/IR view factor `0.8 (n̂·r̂_E)` limited to `[0, 0.8]`.
pub fn view_factor(cos_earth: f64) -> f64 {
    (0.8 * cos_earth).clamp(0.0, 0.8)
}

/// Heat flows for a node whose Hill-frame normal has the given cosines with
/// the Sun and Earth directions. `temperature` is in °C.
pub fn heat_flow(cos_sun: f64, cos_earth: f64, temperature: f64, c: &PhysicalConstants) -> HeatFlow {
    let node = &c.node;
    let absorbed = node.absorptivity * node.area * c.solar_constant;
    let f = view_factor(cos_earth);
    let t_k = temperature + KELVIN_OFFSET;
    HeatFlow {
        solar: absorbed * cos_sun.max(0.0),
        albedo: absorbed * c.albedo_factor * f,
        infrared: c.stefan_boltzmann * node.emissivity * node.area * f * c.earth_temperature.powi(4),
        rejected: c.stefan_boltzmann * node.emissivity * node.area * t_k.powi(4),
    }
}

fn temperature_rate(q: &Quat, temperature: f64, sun: &Vec3, c: &PhysicalConstants) -> f64 {
    let n_hill = q.rotate(&c.node.normal_body);
    let flow = heat_flow(n_hill.dot(sun), n_hill.dot(&EARTH_DIRECTION), temperature, c);
    flow.total() / (c.node.mass * c.node.specific_heat)
}

fn energy_rate(q: &Quat, sun: &Vec3, c: &PhysicalConstants) -> f64 {
    let n_hill = q.rotate(&c.panel.normal_body);
    solar_power(n_hill.dot(sun), c) - c.power_out
}

/// Panel output for a given Sun incidence cosine, W.
pub fn solar_power(cos_sun: f64, c: &PhysicalConstants) -> f64 {
    let p = &c.panel;
    p.ideal_performance * p.degradation * p.area * cos_sun.max(0.0)
}

/// Node temperature rate, K/s.
pub fn thermal_derivative(s: &DeputyState, sun: &SunState, c: &PhysicalConstants) -> f64 {
    temperature_rate(&s.att.q, s.res.temperature, &sun.vector(), c)
}

/// Battery energy rate, W.
pub fn power_derivative(s: &DeputyState, sun: &SunState, c: &PhysicalConstants) -> f64 {
    energy_rate(&s.att.q, &sun.vector(), c)
}

/// Full 15-state derivative with the Sun at angle `theta`.
fn full_derivative(x: &SVector<f64, 15>, u: &ControlInput, theta: f64, c: &PhysicalConstants) -> SVector<f64, 15> {
    let s = DeputyState::from_vector(x);
    let sun = Vec3::new(theta.cos(), theta.sin(), 0.0);
    // thrust follows the stage attitude
    let force_hill = s.att.q.rotate(&u.force);
    let dtrans = cwh_derivative(&s.trans, &force_hill, c);
    let datt = attitude_rate_unchecked(&s.att, &u.torque, c);
    let mut dx = SVector::<f64, 15>::zeros();
    dx.fixed_rows_mut::<6>(0).copy_from(&dtrans);
    dx.fixed_rows_mut::<7>(6).copy_from(&datt);
    dx[13] = energy_rate(&s.att.q, &sun, c);
    dx[14] = temperature_rate(&s.att.q, s.res.temperature, &sun, c);
    dx
}

/// One classical RK4 step of length `dt`, Sun starting at `sun`.
pub fn step(s: &DeputyState, u: &ControlInput, sun: &SunState, dt: f64, c: &PhysicalConstants) -> Result<DeputyState> {
    let x = s.to_vector();
    let th = sun.theta;
    let n = c.mean_motion;
    let k1 = full_derivative(&x, u, th, c);
    let k2 = full_derivative(&(x + k1 * (0.5 * dt)), u, th - n * 0.5 * dt, c);
    let k3 = full_derivative(&(x + k2 * (0.5 * dt)), u, th - n * 0.5 * dt, c);
    let k4 = full_derivative(&(x + k3 * dt), u, th - n * dt, c);
    let x1 = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    let mut out = DeputyState::from_vector(&x1);
    if !out.is_finite() {
        return Err(Error::IntegrationFault { state: Box::new(out) });
    }
    out.att.q = out.att.q.normalized();
    out.res.energy = out.res.energy.max(0.0);
    Ok(out)
}

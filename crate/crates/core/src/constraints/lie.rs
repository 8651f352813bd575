//! Analytic Lie derivatives along `ẋ = f(x) + g(x)u`, with
//! `u = [F_body, τ]`. Translational constraints use their `(p, v)` gradients;
//! attitude-coupled constraints are differentiated in time through the
//! incidence cosines they depend on.

use nalgebra::Matrix3;

use super::{singular, ConstraintContext, ConstraintId, ConstraintSpec};
use crate::dynamics::{cwh_drift_accel, euler_rate, heat_flow, solar_power, view_factor, Quat, Vec3, EARTH_DIRECTION};
use crate::error::Result;

/// Threshold on `sin θ` below which an incidence angle is not differentiable.
const ANGLE_SINGULARITY: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LieDerivatives {
    pub lf: f64,
    pub lg: [f64; 6],
}

impl LieDerivatives {
    /// `L_f h + L_g h·u`.
    pub fn rate(&self, u: &[f64; 6]) -> f64 {
        self.lf + self.lg.iter().zip(u).map(|(g, x)| g * x).sum::<f64>()
    }
}

/// Time derivatives of `c = (R(q) b)·r(t)` for a body-fixed unit vector `b`
/// and a Hill-frame direction `r(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    pub cos: f64,
    pub cos_rate: f64,
    /// `c̈` with zero torque.
    pub cos_accel_drift: f64,
    /// `∂c̈/∂τ`.
    pub cos_accel_torque: Vec3,
}

#[allow(clippy::too_many_arguments)]
pub fn incidence_kinematics(
    q: &Quat,
    omega: &Vec3,
    omega_dot_drift: &Vec3,
    inertia: &Vec3,
    body: &Vec3,
    target: &Vec3,
    target_rate: &Vec3,
    target_accel: &Vec3,
) -> Incidence {
    let b_hill = q.rotate(body);
    let r_body = q.rotate_inverse(target);
    let rdot_body = q.rotate_inverse(target_rate);
    let lever = body.cross(&r_body);
    let cos = b_hill.dot(target);
    let cos_rate = omega.dot(&lever) + b_hill.dot(target_rate);
    // d/dt of the body-frame components of r
    let r_body_rate = -omega.cross(&r_body) + rdot_body;
    let b_hill_rate = q.rotate(&omega.cross(body));
    let cos_accel_drift = omega_dot_drift.dot(&lever)
        + omega.dot(&body.cross(&r_body_rate))
        + b_hill_rate.dot(target_rate)
        + b_hill.dot(target_accel);
    Incidence {
        cos,
        cos_rate,
        cos_accel_drift,
        cos_accel_torque: lever.component_div(inertia),
    }
}

/// `θ = acos c` and its first two time derivatives.
struct AngleRates {
    rate: f64,
    accel_drift: f64,
    accel_torque: Vec3,
}

fn angle_rates(inc: &Incidence, id: ConstraintId) -> Result<AngleRates> {
    let s2 = 1.0 - inc.cos * inc.cos;
    if s2 <= ANGLE_SINGULARITY * ANGLE_SINGULARITY {
        return Err(singular(id));
    }
    let s = s2.sqrt();
    Ok(AngleRates {
        rate: -inc.cos_rate / s,
        accel_drift: -inc.cos_accel_drift / s - inc.cos * inc.cos_rate * inc.cos_rate / (s2 * s),
        accel_torque: inc.cos_accel_torque * (-1.0 / s),
    })
}

/// Kinematic quantities of the context agent shared by every constraint.
struct Frame {
    p: Vec3,
    v: Vec3,
    a_drift: Vec3,
    rot: Matrix3<f64>,
    mass: f64,
    omega: Vec3,
    omega_dot_drift: Vec3,
    inertia: Vec3,
    q: Quat,
    sun: Vec3,
    sun_rate: Vec3,
    sun_accel: Vec3,
}

impl Frame {
    fn new(ctx: &ConstraintContext) -> Self {
        let c = &ctx.model.constants;
        let s = ctx.self_state;
        let n = c.mean_motion;
        let (st, ct) = ctx.sun.theta.sin_cos();
        let sun = Vec3::new(ct, st, 0.0);
        Frame {
            p: s.trans.p,
            v: s.trans.v,
            a_drift: cwh_drift_accel(&s.trans.p, &s.trans.v, n),
            rot: s.att.q.rotation_matrix(),
            mass: c.mass,
            omega: s.att.omega,
            omega_dot_drift: euler_rate(&s.att.omega, &Vec3::zeros(), &c.inertia),
            inertia: c.inertia,
            q: s.att.q,
            sun,
            // θ̇_S = -n
            sun_rate: Vec3::new(n * st, -n * ct, 0.0),
            sun_accel: -sun * (n * n),
        }
    }

    /// Row for a function of `(p, v)` only.
    fn translational(&self, grad_p: &Vec3, grad_v: &Vec3) -> LieDerivatives {
        let lf = grad_p.dot(&self.v) + grad_v.dot(&self.a_drift);
        let gf = self.rot.transpose() * grad_v / self.mass;
        LieDerivatives {
            lf,
            lg: [gf.x, gf.y, gf.z, 0.0, 0.0, 0.0],
        }
    }

    fn incidence(&self, body: &Vec3, target: &Vec3, rate: &Vec3, accel: &Vec3) -> Incidence {
        incidence_kinematics(
            &self.q,
            &self.omega,
            &self.omega_dot_drift,
            &self.inertia,
            body,
            target,
            rate,
            accel,
        )
    }

    fn sun_incidence(&self, body: &Vec3) -> Incidence {
        self.incidence(body, &self.sun, &self.sun_rate, &self.sun_accel)
    }

    fn earth_incidence(&self, body: &Vec3) -> Incidence {
        let zero = Vec3::zeros();
        self.incidence(body, &EARTH_DIRECTION, &zero, &zero)
    }
}

fn unit(v: &Vec3, id: ConstraintId) -> Result<(Vec3, f64)> {
    let n = v.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(singular(id));
    }
    Ok((v / n, n))
}

/// `d/dx sign(z)·sqrt(|z|)` with `z = k·x`, i.e. `k / (2 sqrt|z|)`.
fn signed_sqrt_slope(k: f64, z: f64, id: ConstraintId) -> Result<f64> {
    if z == 0.0 {
        return Err(singular(id));
    }
    Ok(k / (2.0 * z.abs().sqrt()))
}

/// Second-order pieces of a relative-degree-two constraint: `ḣ` (no control)
/// and `ḧ = drift + torque·τ`.
struct SecondOrder {
    rate: f64,
    accel_drift: f64,
    accel_torque: Vec3,
}

fn exclusion_zone(frame: &Frame) -> Result<SecondOrder> {
    let inc = frame.sun_incidence(&Vec3::x());
    let ang = angle_rates(&inc, ConstraintId::Ez)?;
    Ok(SecondOrder {
        rate: ang.rate,
        accel_drift: ang.accel_drift,
        accel_torque: ang.accel_torque,
    })
}

fn temperature(frame: &Frame, ctx: &ConstraintContext) -> Result<SecondOrder> {
    let c = &ctx.model.constants;
    let p = &ctx.model.params;
    let normal = c.node.normal_body;
    let sun = frame.sun_incidence(&normal);
    let earth = frame.earth_incidence(&normal);
    let si = angle_rates(&sun, ConstraintId::Temp)?;
    let ei = angle_rates(&earth, ConstraintId::Temp)?;

    let temp = ctx.self_state.res.temperature;
    let heat_capacity = c.node.mass * c.node.specific_heat;
    let t_rate = heat_flow(sun.cos, earth.cos, temp, c).total() / heat_capacity;

    let node = &c.node;
    let absorbed = node.absorptivity * node.area * c.solar_constant;
    let solar_rate = if sun.cos > 0.0 { absorbed * sun.cos_rate } else { 0.0 };
    let f = 0.8 * earth.cos;
    let view_rate = if f > 0.0 && f < 0.8 { 0.8 * earth.cos_rate } else { 0.0 };
    debug_assert!(view_factor(earth.cos) >= 0.0);
    let albedo_rate = absorbed * c.albedo_factor * view_rate;
    let ir_rate = c.stefan_boltzmann * node.emissivity * node.area * c.earth_temperature.powi(4) * view_rate;
    let t_k = temp + 273.15;
    let rejected_rate = 4.0 * c.stefan_boltzmann * node.emissivity * node.area * t_k.powi(3) * t_rate;
    let t_accel = (solar_rate + albedo_rate + ir_rate - rejected_rate) / heat_capacity;

    Ok(SecondOrder {
        rate: -t_rate + p.delta0 * si.rate + p.delta1 * ei.rate,
        accel_drift: -t_accel + p.delta0 * si.accel_drift + p.delta1 * ei.accel_drift,
        accel_torque: si.accel_torque * p.delta0 + ei.accel_torque * p.delta1,
    })
}

fn battery(frame: &Frame, ctx: &ConstraintContext) -> Result<SecondOrder> {
    let c = &ctx.model.constants;
    let p = &ctx.model.params;
    let inc = frame.sun_incidence(&c.panel.normal_body);
    let si = angle_rates(&inc, ConstraintId::Batt)?;
    let e_rate = solar_power(inc.cos, c) - c.power_out;
    let panel = &c.panel;
    let e_accel = if inc.cos > 0.0 {
        panel.ideal_performance * panel.degradation * panel.area * inc.cos_rate
    } else {
        0.0
    };
    Ok(SecondOrder {
        rate: e_rate - p.delta2 * si.rate,
        accel_drift: e_accel - p.delta2 * si.accel_drift,
        accel_torque: si.accel_torque * (-p.delta2),
    })
}

fn second_order_parts(id: ConstraintId, frame: &Frame, ctx: &ConstraintContext) -> Option<Result<SecondOrder>> {
    match id {
        ConstraintId::Ez => Some(exclusion_zone(frame)),
        ConstraintId::Temp => Some(temperature(frame, ctx)),
        ConstraintId::Batt => Some(battery(frame, ctx)),
        _ => None,
    }
}

/// `(L_f h, L_g h)`.
pub(crate) fn first_order(id: ConstraintId, ctx: &ConstraintContext) -> Result<LieDerivatives> {
    let frame = Frame::new(ctx);
    let params = &ctx.model.params;
    let a_max = ctx.model.a_max;
    match id {
        ConstraintId::Chief => {
            let (p_hat, r) = unit(&frame.p, id)?;
            let vr = frame.v.dot(&frame.p) / r;
            let z = 2.0 * a_max * (r - params.r_deputy - params.r_chief);
            let slope = signed_sqrt_slope(2.0 * a_max, z, id)?;
            let grad_p = p_hat * slope + (frame.v - p_hat * vr) / r;
            Ok(frame.translational(&grad_p, &p_hat))
        }
        ConstraintId::Deputy(j) => {
            let Some(other) = ctx.other(j) else {
                return Ok(LieDerivatives::default());
            };
            let d = frame.p - other.trans.p;
            let w = frame.v - other.trans.v;
            let (d_hat, rho) = unit(&d, id)?;
            let wr = w.dot(&d) / rho;
            let z = 4.0 * a_max * (rho - 2.0 * params.r_deputy);
            let slope = signed_sqrt_slope(4.0 * a_max, z, id)?;
            let grad_d = d_hat * slope + (w - d_hat * wr) / rho;
            // the other deputy is treated as coasting
            let a_other = cwh_drift_accel(&other.trans.p, &other.trans.v, ctx.model.constants.mean_motion);
            let lf = grad_d.dot(&w) + d_hat.dot(&(frame.a_drift - a_other));
            let gf = frame.rot.transpose() * d_hat / frame.mass;
            Ok(LieDerivatives {
                lf,
                lg: [gf.x, gf.y, gf.z, 0.0, 0.0, 0.0],
            })
        }
        ConstraintId::Speed => {
            let (p_hat, _) = unit(&frame.p, id)?;
            let (v_hat, _) = unit(&frame.v, id)?;
            Ok(frame.translational(&(p_hat * ctx.model.nu1()), &(-v_hat)))
        }
        ConstraintId::Prox => {
            let (p_hat, r) = unit(&frame.p, id)?;
            let vr = frame.v.dot(&frame.p) / r;
            let z = 2.0 * a_max * (params.r_max - r);
            let slope = signed_sqrt_slope(2.0 * a_max, z, id)?;
            let grad_p = -p_hat * slope - (frame.v - p_hat * vr) / r;
            Ok(frame.translational(&grad_p, &(-p_hat)))
        }
        ConstraintId::Psm => {
            let grid = ctx.model.psm_grid();
            let ca = grid.closest_approach(&ctx.self_state.trans);
            let (dir, _) = unit(&ca.position, id)?;
            let tr = grid.transition(ca.index);
            Ok(frame.translational(&(tr.pp.transpose() * dir), &(tr.pv.transpose() * dir)))
        }
        ConstraintId::VelX | ConstraintId::VelY | ConstraintId::VelZ => {
            let k = match id {
                ConstraintId::VelX => 0,
                ConstraintId::VelY => 1,
                _ => 2,
            };
            let mut grad_v = Vec3::zeros();
            grad_v[k] = -2.0 * frame.v[k];
            Ok(frame.translational(&Vec3::zeros(), &grad_v))
        }
        ConstraintId::OmegaX | ConstraintId::OmegaY | ConstraintId::OmegaZ => {
            let k = match id {
                ConstraintId::OmegaX => 0,
                ConstraintId::OmegaY => 1,
                _ => 2,
            };
            let w = frame.omega[k];
            let mut lg = [0.0; 6];
            lg[3 + k] = -2.0 * w / frame.inertia[k];
            Ok(LieDerivatives {
                lf: -2.0 * w * frame.omega_dot_drift[k],
                lg,
            })
        }
        ConstraintId::Ez | ConstraintId::Temp | ConstraintId::Batt => {
            let parts = second_order_parts(id, &frame, ctx).expect("degree-two id")?;
            Ok(LieDerivatives {
                lf: parts.rate,
                lg: [0.0; 6],
            })
        }
    }
}

/// `(L_f Ψ₁, L_g Ψ₁)` with `Ψ₁ = ḣ + α₁(h)`.
pub(crate) fn second_order(spec: &ConstraintSpec, ctx: &ConstraintContext) -> Result<LieDerivatives> {
    let frame = Frame::new(ctx);
    let Some(parts) = second_order_parts(spec.id, &frame, ctx) else {
        // relative degree one: nothing to compose
        return first_order(spec.id, ctx);
    };
    let parts = parts?;
    let h = super::value(spec.id, ctx);
    let lf = parts.accel_drift + spec.alpha[0].derivative(h) * parts.rate;
    Ok(LieDerivatives {
        lf,
        lg: [
            0.0,
            0.0,
            0.0,
            parts.accel_torque.x,
            parts.accel_torque.y,
            parts.accel_torque.z,
        ],
    })
}

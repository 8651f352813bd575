//! Safety constraints `h(x) ≥ 0` for a single deputy, their strengthening
//! functions and the Lie derivatives used to build CBF rows.
//!
//! Relative-degree-two constraints (exclusion zone, temperature, battery) are
//! handled with the high-order recursion `Ψ₁ = ḣ + α₁(h)`, and the row handed
//! to the QP is then built from `Ψ₁` and `α₂`.

mod lie;

pub use lie::{incidence_kinematics, Incidence, LieDerivatives};

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::dynamics::{DeputyState, DriftGrid, PhysicalConstants, SunState, Vec3, EARTH_DIRECTION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintId {
    Chief,
    /// Collision avoidance with the deputy carrying this agent id.
    Deputy(usize),
    Speed,
    Prox,
    Psm,
    VelX,
    VelY,
    VelZ,
    Ez,
    Temp,
    Batt,
    OmegaX,
    OmegaY,
    OmegaZ,
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintId::Chief => write!(f, "chief"),
            ConstraintId::Deputy(j) => write!(f, "deputy_{j}"),
            ConstraintId::Speed => write!(f, "speed"),
            ConstraintId::Prox => write!(f, "prox"),
            ConstraintId::Psm => write!(f, "psm"),
            ConstraintId::VelX => write!(f, "vel_x"),
            ConstraintId::VelY => write!(f, "vel_y"),
            ConstraintId::VelZ => write!(f, "vel_z"),
            ConstraintId::Ez => write!(f, "ez"),
            ConstraintId::Temp => write!(f, "temp"),
            ConstraintId::Batt => write!(f, "batt"),
            ConstraintId::OmegaX => write!(f, "omega_x"),
            ConstraintId::OmegaY => write!(f, "omega_y"),
            ConstraintId::OmegaZ => write!(f, "omega_z"),
        }
    }
}

impl ConstraintId {
    pub fn relative_degree(&self) -> u8 {
        match self {
            ConstraintId::Ez | ConstraintId::Temp | ConstraintId::Batt => 2,
            _ => 1,
        }
    }

    /// Collision constraints are never relaxed.
    pub fn is_hard(&self) -> bool {
        matches!(self, ConstraintId::Chief | ConstraintId::Deputy(_))
    }
}

/// Class-κ strengthening function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strengthening {
    Linear(f64),
}

impl Strengthening {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Strengthening::Linear(k) => k * x,
        }
    }

    pub fn derivative(&self, _x: f64) -> f64 {
        match self {
            Strengthening::Linear(k) => *k,
        }
    }

    /// `α(0) = 0` and strictly increasing on a sample grid.
    pub fn is_class_kappa(&self) -> bool {
        if self.eval(0.0) != 0.0 {
            return false;
        }
        let grid: Vec<f64> = (-100..=100).map(|i| i as f64 * 0.37).collect();
        grid.windows(2).all(|w| self.eval(w[1]) > self.eval(w[0]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub id: ConstraintId,
    pub relative_degree: u8,
    /// One function per differentiation level.
    pub alpha: [Strengthening; 2],
    pub slackable: bool,
    pub slack_weight: f64,
}

/// Geometric and limit parameters of the constraint set. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyParams {
    pub r_deputy: f64,
    pub r_chief: f64,
    pub nu0: f64,
    /// `ν₁ = nu1_orbits · n`, 1/s.
    pub nu1_orbits: f64,
    pub r_max: f64,
    pub psm_horizon: f64,
    pub psm_dt: f64,
    pub v_max: f64,
    pub omega_max: f64,
    pub fov: f64,
    pub ez_buffer: f64,
    pub temp_max: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub energy_min: f64,
    pub delta2: f64,
    pub slack_weight: f64,
    /// Gain of the linear strengthening function on relative-degree-one
    /// constraints.
    pub alpha_first_order: f64,
    /// Gains `(α₁, α₂)` of the high-order recursion.
    pub alpha_high_order: [f64; 2],
    /// Battery constraint gains `(α₁, α₂)`; the energy state is in joules.
    pub alpha_battery: [f64; 2],
    /// Extra separation, m, added to every collision radius sum and taken off
    /// the proximity limit in the filter's copy of the constraints.
    pub collision_buffer: f64,
    /// Fraction of the available braking acceleration the filter's copy of
    /// the constraints may plan on.
    pub braking_fraction: f64,
}

impl Default for SafetyParams {
    fn default() -> Self {
        SafetyParams {
            r_deputy: 5.0,
            r_chief: 10.0,
            nu0: 0.2,
            nu1_orbits: 7.5,
            r_max: 800.0,
            psm_horizon: 500.0,
            psm_dt: 1.0,
            v_max: 5.0,
            omega_max: 2f64.to_radians(),
            fov: 20f64.to_radians(),
            ez_buffer: 10f64.to_radians(),
            temp_max: 10.0,
            delta0: 0.05,
            delta1: 0.01,
            energy_min: 1000.0,
            delta2: 0.05,
            slack_weight: 1e12,
            alpha_first_order: 0.1,
            alpha_high_order: [0.5, 0.5],
            alpha_battery: [0.01, 0.5],
            collision_buffer: 1.0,
            braking_fraction: 0.5,
        }
    }
}

impl SafetyParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r_deputy", self.r_deputy),
            ("r_chief", self.r_chief),
            ("psm_horizon", self.psm_horizon),
            ("psm_dt", self.psm_dt),
            ("v_max", self.v_max),
            ("omega_max", self.omega_max),
            ("fov", self.fov),
            ("slack_weight", self.slack_weight),
            ("alpha_first_order", self.alpha_first_order),
            (
                "alpha_high_order",
                self.alpha_high_order[0].min(self.alpha_high_order[1]),
            ),
            ("alpha_battery", self.alpha_battery[0].min(self.alpha_battery[1])),
            ("braking_fraction", self.braking_fraction),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, "must be positive"));
            }
        }
        let non_negative = [
            ("nu0", self.nu0),
            ("nu1_orbits", self.nu1_orbits),
            ("ez_buffer", self.ez_buffer),
            ("delta0", self.delta0),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("collision_buffer", self.collision_buffer),
        ];
        for (field, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(field, "must be non-negative"));
            }
        }
        if self.braking_fraction > 1.0 {
            return Err(Error::config("braking_fraction", "must not exceed 1"));
        }
        if !(self.r_max > self.r_chief + self.r_deputy + self.collision_buffer) {
            return Err(Error::config("r_max", "must exceed the collision radii"));
        }
        Ok(())
    }
}

/// Everything needed to evaluate the constraint set: parameters, physical
/// constants and the tabulated passive-safety drift grid.
#[derive(Debug, Clone)]
pub struct SafetyModel {
    pub params: SafetyParams,
    pub constants: PhysicalConstants,
    /// Braking acceleration used by the collision and proximity constraints.
    pub a_max: f64,
    psm_grid: DriftGrid,
}

impl SafetyModel {
    pub fn new(params: SafetyParams, constants: PhysicalConstants) -> Self {
        let psm_grid = DriftGrid::new(params.psm_horizon, params.psm_dt, constants.mean_motion);
        SafetyModel {
            a_max: constants.accel_max(),
            params,
            constants,
            psm_grid,
        }
    }

    /// Copy with the collision radii grown by `collision_buffer` and the
    /// braking acceleration scaled by `braking_fraction`. The filter enforces
    /// this copy so sampled control keeps the nominal constraints satisfied.
    pub fn tightened(&self) -> SafetyModel {
        let mut params = self.params;
        params.r_chief += 0.5 * params.collision_buffer;
        params.r_deputy += 0.5 * params.collision_buffer;
        params.r_max -= params.collision_buffer;
        SafetyModel {
            params,
            constants: self.constants,
            a_max: self.a_max * params.braking_fraction,
            psm_grid: self.psm_grid.clone(),
        }
    }

    pub fn psm_grid(&self) -> &DriftGrid {
        &self.psm_grid
    }

    pub fn nu1(&self) -> f64 {
        self.params.nu1_orbits * self.constants.mean_motion
    }

    pub fn spec(&self, id: ConstraintId) -> ConstraintSpec {
        let p = &self.params;
        let alpha = match id {
            ConstraintId::Batt => p.alpha_battery.map(Strengthening::Linear),
            ConstraintId::Ez | ConstraintId::Temp => p.alpha_high_order.map(Strengthening::Linear),
            _ => [Strengthening::Linear(p.alpha_first_order); 2],
        };
        let slackable = !id.is_hard();
        ConstraintSpec {
            id,
            relative_degree: id.relative_degree(),
            alpha,
            slackable,
            slack_weight: if slackable { p.slack_weight } else { 0.0 },
        }
    }

    /// Full constraint set for an agent sharing the scene with `others`.
    pub fn specs(&self, others: &[(usize, DeputyState)]) -> Vec<ConstraintSpec> {
        let mut ids = vec![ConstraintId::Chief];
        ids.extend(others.iter().map(|(j, _)| ConstraintId::Deputy(*j)));
        ids.extend([
            ConstraintId::Speed,
            ConstraintId::Prox,
            ConstraintId::Psm,
            ConstraintId::VelX,
            ConstraintId::VelY,
            ConstraintId::VelZ,
            ConstraintId::Ez,
            ConstraintId::Temp,
            ConstraintId::Batt,
            ConstraintId::OmegaX,
            ConstraintId::OmegaY,
            ConstraintId::OmegaZ,
        ]);
        ids.into_iter().map(|id| self.spec(id)).collect()
    }
}

/// State snapshot a constraint is evaluated against.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintContext<'a> {
    pub model: &'a SafetyModel,
    pub self_state: &'a DeputyState,
    /// Other live deputies as `(agent id, state)`.
    pub others: &'a [(usize, DeputyState)],
    pub sun: SunState,
}

impl<'a> ConstraintContext<'a> {
    pub fn new(
        model: &'a SafetyModel,
        self_state: &'a DeputyState,
        others: &'a [(usize, DeputyState)],
        sun: SunState,
    ) -> Self {
        ConstraintContext {
            model,
            self_state,
            others,
            sun,
        }
    }

    fn params(&self) -> &SafetyParams {
        &self.model.params
    }

    pub(crate) fn other(&self, id: usize) -> Option<&DeputyState> {
        self.others.iter().find(|(j, _)| *j == id).map(|(_, s)| s)
    }
}

/// `sign(z)·sqrt(|z|)`: the square root extended past its boundary so the
/// collision constraints stay defined (and negative) when violated.
pub fn signed_sqrt(z: f64) -> f64 {
    if z >= 0.0 {
        z.sqrt()
    } else {
        -(-z).sqrt()
    }
}

pub fn h_chief(ctx: &ConstraintContext) -> f64 {
    let s = &ctx.self_state.trans;
    let r = s.p.norm();
    let reach = ctx.params().r_deputy + ctx.params().r_chief;
    signed_sqrt(2.0 * ctx.model.a_max * (r - reach)) + s.v.dot(&s.p) / r
}

/// Pairwise collision constraint between the context agent and deputy `j`.
/// Returns `None` when `j` is not in the context.
pub fn h_deputy(ctx: &ConstraintContext, j: usize) -> Option<f64> {
    let other = ctx.other(j)?;
    Some(h_deputy_pair(ctx.model, ctx.self_state, other))
}

pub fn h_deputy_pair(model: &SafetyModel, a: &DeputyState, b: &DeputyState) -> f64 {
    let d = a.trans.p - b.trans.p;
    let w = a.trans.v - b.trans.v;
    let rho = d.norm();
    signed_sqrt(4.0 * model.a_max * (rho - 2.0 * model.params.r_deputy)) + w.dot(&d) / rho
}

pub fn h_speed(ctx: &ConstraintContext) -> f64 {
    let s = &ctx.self_state.trans;
    ctx.params().nu0 + ctx.model.nu1() * s.p.norm() - s.v.norm()
}

pub fn h_prox(ctx: &ConstraintContext) -> f64 {
    let s = &ctx.self_state.trans;
    let r = s.p.norm();
    signed_sqrt(2.0 * ctx.model.a_max * (ctx.params().r_max - r)) - s.v.dot(&s.p) / r
}

/// Closest approach of the unforced drift over the passive-safety horizon
/// (1 s grid), minus the collision radius.
pub fn h_psm(ctx: &ConstraintContext) -> f64 {
    let ca = ctx.model.psm_grid().closest_approach(&ctx.self_state.trans);
    ca.distance - (ctx.params().r_deputy + ctx.params().r_chief)
}

pub fn h_velocity_box(ctx: &ConstraintContext) -> [f64; 3] {
    let vmax2 = ctx.params().v_max.powi(2);
    let v = ctx.self_state.trans.v;
    [vmax2 - v.x * v.x, vmax2 - v.y * v.y, vmax2 - v.z * v.z]
}

pub fn h_omega_box(ctx: &ConstraintContext) -> [f64; 3] {
    let wmax2 = ctx.params().omega_max.powi(2);
    let w = ctx.self_state.att.omega;
    [wmax2 - w.x * w.x, wmax2 - w.y * w.y, wmax2 - w.z * w.z]
}

fn incidence_angle(ctx: &ConstraintContext, body: &Vec3, target: &Vec3) -> f64 {
    let n = ctx.self_state.att.q.rotate(body);
    n.dot(target).clamp(-1.0, 1.0).acos()
}

/// Sensor exclusion zone: boresight-to-Sun angle minus half the field of view
/// and the buffer.
pub fn h_ez(ctx: &ConstraintContext) -> f64 {
    let theta = incidence_angle(ctx, &Vec3::x(), &ctx.sun.vector());
    theta - 0.5 * ctx.params().fov - ctx.params().ez_buffer
}

pub fn h_temp(ctx: &ConstraintContext) -> f64 {
    let p = ctx.params();
    let normal = ctx.model.constants.node.normal_body;
    let theta_si = incidence_angle(ctx, &normal, &ctx.sun.vector());
    let theta_ei = incidence_angle(ctx, &normal, &EARTH_DIRECTION);
    p.temp_max - ctx.self_state.res.temperature - p.delta0 * (FRAC_PI_2 - theta_si) - p.delta1 * (FRAC_PI_2 - theta_ei)
}

/// Battery margin. The Sun incidence term uses the solar panel normal.
pub fn h_batt(ctx: &ConstraintContext) -> f64 {
    let p = ctx.params();
    let normal = ctx.model.constants.panel.normal_body;
    let theta_si = incidence_angle(ctx, &normal, &ctx.sun.vector());
    ctx.self_state.res.energy - p.energy_min - p.delta2 * theta_si
}

/// Value of constraint `id`. Deputy constraints against an agent missing from
/// the context evaluate to `+∞`.
pub fn value(id: ConstraintId, ctx: &ConstraintContext) -> f64 {
    match id {
        ConstraintId::Chief => h_chief(ctx),
        ConstraintId::Deputy(j) => h_deputy(ctx, j).unwrap_or(f64::INFINITY),
        ConstraintId::Speed => h_speed(ctx),
        ConstraintId::Prox => h_prox(ctx),
        ConstraintId::Psm => h_psm(ctx),
        ConstraintId::VelX => h_velocity_box(ctx)[0],
        ConstraintId::VelY => h_velocity_box(ctx)[1],
        ConstraintId::VelZ => h_velocity_box(ctx)[2],
        ConstraintId::Ez => h_ez(ctx),
        ConstraintId::Temp => h_temp(ctx),
        ConstraintId::Batt => h_batt(ctx),
        ConstraintId::OmegaX => h_omega_box(ctx)[0],
        ConstraintId::OmegaY => h_omega_box(ctx)[1],
        ConstraintId::OmegaZ => h_omega_box(ctx)[2],
    }
}

/// One linear CBF inequality `lf + lg·u + alpha_term ≥ s` on the six control
/// channels `[F_body, τ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbfRow {
    pub id: ConstraintId,
    pub lf: f64,
    pub lg: [f64; 6],
    pub alpha_term: f64,
    /// `h` for degree one, `Ψ₁` for degree two.
    pub barrier: f64,
}

impl CbfRow {
    /// Left-hand side evaluated at `u`.
    pub fn evaluate(&self, u: &[f64; 6]) -> f64 {
        self.lf + self.alpha_term + self.lg.iter().zip(u).map(|(g, x)| g * x).sum::<f64>()
    }
}

/// `Ψⱼ` of the high-order recursion: `j = 0` is `h` itself, `j = 1` is
/// `ḣ + α₁(h)` (only meaningful for relative-degree-two constraints, whose
/// `ḣ` carries no control).
pub fn psi(spec: &ConstraintSpec, ctx: &ConstraintContext, j: u8) -> Result<f64> {
    let h = value(spec.id, ctx);
    match j {
        0 => Ok(h),
        _ => {
            let d = lie::first_order(spec.id, ctx)?;
            Ok(d.lf + spec.alpha[0].eval(h))
        }
    }
}

/// Lie derivatives of `h` (`degree = 1`) or of `Ψ₁` (`degree = 2`) along the
/// coupled dynamics.
pub fn lie_derivatives(spec: &ConstraintSpec, ctx: &ConstraintContext, degree: u8) -> Result<LieDerivatives> {
    match degree {
        1 => lie::first_order(spec.id, ctx),
        _ => lie::second_order(spec, ctx),
    }
}

/// Linear-in-`u` row for the QP: from `h` with `α` for relative-degree-one
/// specs, from `Ψ₁` with `α₂` for relative-degree-two specs.
pub fn hocbf_compose(spec: &ConstraintSpec, ctx: &ConstraintContext) -> Result<CbfRow> {
    if spec.relative_degree <= 1 {
        let h = value(spec.id, ctx);
        let d = lie::first_order(spec.id, ctx)?;
        // both deputies of a pair run the same filter, each takes half the
        // required rate
        let share = if matches!(spec.id, ConstraintId::Deputy(_)) {
            0.5
        } else {
            1.0
        };
        Ok(CbfRow {
            id: spec.id,
            lf: share * d.lf,
            lg: d.lg,
            alpha_term: share * spec.alpha[0].eval(h),
            barrier: h,
        })
    } else {
        let psi1 = psi(spec, ctx, 1)?;
        let d = lie::second_order(spec, ctx)?;
        Ok(CbfRow {
            id: spec.id,
            lf: d.lf,
            lg: d.lg,
            alpha_term: spec.alpha[1].eval(psi1),
            barrier: psi1,
        })
    }
}

pub(crate) fn singular(id: ConstraintId) -> Error {
    Error::GradientSingularity { constraint: id }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{AttitudeState, Quat, ResourceState, TranslationalState};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn model() -> SafetyModel {
        SafetyModel::new(SafetyParams::default(), PhysicalConstants::default())
    }

    fn state(p: Vec3, v: Vec3) -> DeputyState {
        DeputyState {
            trans: TranslationalState { p, v },
            att: AttitudeState::default(),
            res: ResourceState {
                energy: 5000.0,
                temperature: 5.0,
            },
        }
    }

    fn ctx<'a>(m: &'a SafetyModel, s: &'a DeputyState, others: &'a [(usize, DeputyState)]) -> ConstraintContext<'a> {
        ConstraintContext::new(m, s, others, SunState::new(0.0))
    }

    #[test]
    fn chief_examples() {
        let m = model();
        let s = state(Vec3::new(15.0, 0.0, 0.0), Vec3::zeros());
        assert_eq!(h_chief(&ctx(&m, &s, &[])), 0.0);
        let s = state(Vec3::new(0.0, 100.0, 0.0), Vec3::zeros());
        let base = h_chief(&ctx(&m, &s, &[]));
        assert_relative_eq!(base, (2.0 / 12.0 * 85.0f64).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(base, 3.7639, epsilon = 1e-4);
        let s = state(Vec3::new(0.0, 100.0, 0.0), Vec3::new(0.0, -1.0, 0.0));
        assert_relative_eq!(h_chief(&ctx(&m, &s, &[])), base - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn chief_continuation_is_continuous_across_boundary() {
        let m = model();
        let mut last = None;
        for k in -20..=20 {
            let r = 15.0 + k as f64 * 1e-9;
            let s = state(Vec3::new(r, 0.0, 0.0), Vec3::zeros());
            let h = h_chief(&ctx(&m, &s, &[]));
            match k.cmp(&0) {
                std::cmp::Ordering::Less => assert!(h < 0.0),
                std::cmp::Ordering::Equal => assert_eq!(h, 0.0),
                std::cmp::Ordering::Greater => assert!(h > 0.0),
            }
            if let Some(prev) = last {
                let jump: f64 = h - prev;
                assert!(jump.abs() < 1e-4, "jump {jump} at r={r}");
            }
            last = Some(h);
        }
    }

    #[test]
    fn deputy_examples_and_symmetry() {
        let m = model();
        let a = state(Vec3::new(50.0, 0.0, 0.0), Vec3::new(0.1, 0.0, 0.0));
        let b = state(Vec3::new(60.0, 0.0, 0.0), Vec3::new(0.1, 0.0, 0.0));
        assert_eq!(h_deputy_pair(&m, &a, &b), 0.0);
        let b = state(Vec3::new(160.0, 0.0, 0.0), Vec3::new(0.1, 0.0, 0.0));
        assert_relative_eq!(h_deputy_pair(&m, &a, &b), 5.7735, epsilon = 1e-4);
        let a = state(Vec3::new(13.0, -40.0, 7.0), Vec3::new(0.3, 0.1, -0.2));
        let b = state(Vec3::new(-31.0, 22.0, 5.0), Vec3::new(-0.1, 0.4, 0.05));
        assert_eq!(h_deputy_pair(&m, &a, &b), h_deputy_pair(&m, &b, &a));
        let others = [(4, b)];
        assert_eq!(h_deputy(&ctx(&m, &a, &others), 4), Some(h_deputy_pair(&m, &a, &b)));
        assert_eq!(h_deputy(&ctx(&m, &a, &others), 2), None);
    }

    #[test]
    fn speed_and_prox_examples() {
        let m = model();
        let s = state(Vec3::zeros(), Vec3::zeros());
        assert_relative_eq!(h_speed(&ctx(&m, &s, &[])), 0.2);
        let s = state(Vec3::new(100.0, 0.0, 0.0), Vec3::zeros());
        assert_relative_eq!(h_speed(&ctx(&m, &s, &[])), 0.97025, epsilon = 1e-12);
        let s = state(Vec3::new(100.0, 0.0, 0.0), Vec3::new(0.0, 0.97025, 0.0));
        assert!(h_speed(&ctx(&m, &s, &[])).abs() < 1e-12);

        let s = state(Vec3::new(0.0, 800.0, 0.0), Vec3::zeros());
        assert_eq!(h_prox(&ctx(&m, &s, &[])), 0.0);
        let s = state(Vec3::new(0.0, 0.0, 100.0), Vec3::zeros());
        let base = h_prox(&ctx(&m, &s, &[]));
        assert_relative_eq!(base, 10.8012, epsilon = 1e-4);
        let s = state(Vec3::new(0.0, 0.0, 100.0), Vec3::new(0.0, 0.0, 0.5));
        assert_relative_eq!(h_prox(&ctx(&m, &s, &[])), base - 0.5, epsilon = 1e-12);
    }

    #[test]
    fn psm_examples() {
        let m = model();
        let s = state(Vec3::new(100.0, 0.0, 0.0), Vec3::zeros());
        // radial offset drifts outward: the closest point is the start
        assert_relative_eq!(h_psm(&ctx(&m, &s, &[])), 85.0, epsilon = 1e-12);
        let s = state(Vec3::new(15.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0));
        assert!(h_psm(&ctx(&m, &s, &[])) < 0.0);
        let s = state(Vec3::new(800.0, 0.0, 0.0), Vec3::zeros());
        assert!(h_psm(&ctx(&m, &s, &[])) > 0.0);
    }

    #[test]
    fn box_examples() {
        let m = model();
        let s = state(Vec3::new(50.0, 0.0, 0.0), Vec3::zeros());
        assert_eq!(h_velocity_box(&ctx(&m, &s, &[])), [25.0; 3]);
        let s = state(Vec3::new(50.0, 0.0, 0.0), Vec3::new(5.0, 0.0, 0.0));
        assert_eq!(h_velocity_box(&ctx(&m, &s, &[]))[0], 0.0);
        let mut s = state(Vec3::new(50.0, 0.0, 0.0), Vec3::zeros());
        s.att.omega.x = 0.034906585;
        assert!(h_omega_box(&ctx(&m, &s, &[]))[0].abs() < 1e-9);
    }

    #[test]
    fn exclusion_zone_examples() {
        let m = model();
        let s = state(Vec3::new(50.0, 0.0, 0.0), Vec3::zeros());
        // identity attitude: boresight = Hill +x
        let away = ConstraintContext::new(&m, &s, &[], SunState::new(PI));
        assert_relative_eq!(h_ez(&away), PI - 20f64.to_radians(), epsilon = 1e-12);
        assert_relative_eq!(h_ez(&away), 2.79253, epsilon = 1e-5);
        let at = ConstraintContext::new(&m, &s, &[], SunState::new(0.0));
        assert_relative_eq!(h_ez(&at), -0.349066, epsilon = 1e-6);
        let edge = ConstraintContext::new(&m, &s, &[], SunState::new(20f64.to_radians()));
        assert!(h_ez(&edge).abs() < 1e-12);
    }

    #[test]
    fn temperature_and_battery_examples() {
        let m = model();
        let mut s = state(Vec3::new(50.0, 0.0, 0.0), Vec3::zeros());
        // node normal body -y, identity attitude; Sun along +x -> both angles π/2
        s.res.temperature = 10.0;
        let c = ConstraintContext::new(&m, &s, &[], SunState::new(0.0));
        assert!(h_temp(&c).abs() < 1e-12);

        // node facing the Sun (Sun at -y) and Earth exactly behind it
        let q = Quat::from_axis_angle(&Vec3::z(), PI / 2.0); // body -y -> Hill +x
        s.att.q = q;
        s.res.temperature = 5.0;
        let c = ConstraintContext::new(&m, &s, &[], SunState::new(0.0));
        assert_relative_eq!(h_temp(&c), 5.0 - 0.05 * FRAC_PI_2 + 0.01 * FRAC_PI_2, epsilon = 1e-12);
        assert_relative_eq!(h_temp(&c), 4.93717, epsilon = 1e-5);

        // panel normal body -x faces the Sun at θ_S = π under identity
        let mut s = state(Vec3::new(50.0, 0.0, 0.0), Vec3::zeros());
        s.res.energy = 1000.0;
        let c = ConstraintContext::new(&m, &s, &[], SunState::new(PI));
        assert!(h_batt(&c).abs() < 1e-12);
    }

    #[test]
    fn strengthening_functions_are_class_kappa() {
        let m = model();
        for spec in m.specs(&[(1, DeputyState::default())]) {
            assert!(spec.alpha.iter().all(|a| a.is_class_kappa()), "{}", spec.id);
            assert_eq!(spec.slackable, !spec.id.is_hard());
            if spec.slackable {
                assert_eq!(spec.slack_weight, 1e12);
            }
        }
        assert!(!Strengthening::Linear(-1.0).is_class_kappa());
    }

    #[test]
    fn spec_set_shape() {
        let m = model();
        let others = [(1, DeputyState::default()), (2, DeputyState::default())];
        let specs = m.specs(&others);
        assert_eq!(specs.len(), 15);
        assert_eq!(specs.iter().filter(|s| !s.slackable).count(), 3);
        assert_eq!(specs.iter().filter(|s| s.relative_degree == 2).count(), 3);
    }
}

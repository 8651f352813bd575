//! Per-step reward terms.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ControlInput, DeputyState, PhysicalConstants, Vec3};

pub const POINTS_SCALE: f64 = 1.0;
pub const DELTA_V_SCALE: f64 = -0.1;
pub const TORQUE_SCALE: f64 = -0.1;
pub const ORIENT_PEAK: f64 = 0.0005;
pub const ORIENT_WIDTH: f64 = 0.15;
pub const CRASH_PENALTY: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_points: f64,
    pub r_dv: f64,
    pub r_tau: f64,
    pub r_orient: f64,
    pub r_crash: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn new(r_points: f64, r_dv: f64, r_tau: f64, r_orient: f64, r_crash: f64) -> Self {
        RewardBreakdown {
            r_points,
            r_dv,
            r_tau,
            r_orient,
            r_crash,
            total: Self::sum(r_points, r_dv, r_tau, r_orient, r_crash),
        }
    }

    /// The component sum, always accumulated in this order.
    pub fn sum(r_points: f64, r_dv: f64, r_tau: f64, r_orient: f64, r_crash: f64) -> f64 {
        r_points + r_dv + r_tau + r_orient + r_crash
    }
}

/// `(|Fx| + |Fy| + |Fz|)/m · dt`.
pub fn delta_v(force: &Vec3, dt: f64, c: &PhysicalConstants) -> f64 {
    force.abs().sum() / c.mass * dt
}

/// Sensor-to-chief alignment `d = r̂_B·(−p̂)` and its reward.
pub fn orientation_reward(s: &DeputyState) -> f64 {
    let r = s.trans.p.norm();
    if r == 0.0 {
        return 0.0;
    }
    let boresight = s.att.q.rotate(&Vec3::x());
    let d = boresight.dot(&(-s.trans.p / r));
    let off = (d - 1.0).abs();
    if off <= 1.0 {
        ORIENT_PEAK * (-off / ORIENT_WIDTH).exp()
    } else {
        0.0
    }
}

/// Reward for a step in which the new inspected weight is `delta_weight`,
/// `dv` was spent, `torque_l1 = |τx|+|τy|+|τz|` was applied, and the agent
/// ended in `state`. `crash` is the outcome of the post-task drift check.
pub fn reward_step(delta_weight: f64, dv: f64, torque_l1: f64, state: &DeputyState, crash: bool) -> RewardBreakdown {
    RewardBreakdown::new(
        POINTS_SCALE * delta_weight,
        DELTA_V_SCALE * dv,
        TORQUE_SCALE * torque_l1,
        orientation_reward(state),
        if crash { CRASH_PENALTY } else { 0.0 },
    )
}

/// Same as [`reward_step`] for a control held over the whole step.
pub fn reward_for_control(
    delta_weight: f64,
    u: &ControlInput,
    dt: f64,
    state: &DeputyState,
    crash: bool,
    c: &PhysicalConstants,
) -> RewardBreakdown {
    reward_step(
        delta_weight,
        delta_v(&u.force, dt, c),
        u.torque.abs().sum(),
        state,
        crash,
    )
}

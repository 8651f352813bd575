//! Active Set Invariance Filter: the QP that minimally modifies a desired
//! control so every CBF row holds.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::constraints::{hocbf_compose, value, CbfRow, ConstraintContext, ConstraintId, SafetyModel};
use crate::dynamics::{step, ControlInput, DeputyState, PhysicalConstants, SunState};
use crate::error::{Error, Result};
use crate::qp::{QpStatus, QuadraticProgram};

/// Threshold on `‖u_act − u_des‖∞` above which the filter counts as having
/// intervened.
pub const INTERVENTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub slack_weight: f64,
    pub thrust_max: f64,
    pub torque_max: f64,
}

impl FilterConfig {
    pub fn new(model: &SafetyModel) -> Self {
        FilterConfig {
            slack_weight: model.params.slack_weight,
            thrust_max: model.constants.thrust_max,
            torque_max: model.constants.torque_max,
        }
    }

    fn bounds(&self) -> ([f64; 6], [f64; 6]) {
        let (f, t) = (self.thrust_max, self.torque_max);
        ([-f, -f, -f, -t, -t, -t], [f, f, f, t, t, t])
    }
}

/// Which rung of the infeasibility ladder produced the control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterStage {
    /// `u_des` already satisfied every row.
    Passthrough,
    Full,
    HardOnly,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterResult {
    pub u_act: ControlInput,
    pub intervened: bool,
    /// Rows with a positive multiplier at the solution.
    pub active_constraints: Vec<ConstraintId>,
    pub slack_values: Vec<(ConstraintId, f64)>,
    /// Constraints left out because their gradient is singular at this state.
    pub skipped: Vec<ConstraintId>,
    pub safety_fault: bool,
    pub stage: FilterStage,
    /// `h` of every constraint at the filtered state.
    pub values: Vec<(ConstraintId, f64)>,
}

fn within_bounds(u: &[f64; 6], cfg: &FilterConfig) -> bool {
    let (lb, ub) = cfg.bounds();
    u.iter().zip(lb.iter().zip(&ub)).all(|(x, (l, h))| x >= l && x <= h)
}

struct Solved {
    u: [f64; 6],
    active: Vec<ConstraintId>,
    slack: Vec<(ConstraintId, f64)>,
}

/// Solves the ASIF QP over `rows`; slack variables are attached to the rows
/// whose flag is set.
fn solve_rows(u_des: &[f64; 6], rows: &[(CbfRow, bool)], cfg: &FilterConfig) -> Option<Solved> {
    let n_slack = rows.iter().filter(|(_, s)| *s).count();
    let n = 6 + n_slack;
    let mut weights = vec![1.0; 6];
    weights.resize(n, cfg.slack_weight);
    let mut target = u_des.to_vec();
    target.resize(n, 0.0);
    let mut qp = QuadraticProgram::least_squares(&weights, &target);
    let (lb, ub) = cfg.bounds();
    qp.lb = lb.to_vec();
    qp.ub = ub.to_vec();
    let mut slack_index = Vec::with_capacity(rows.len());
    let mut next = 6;
    for (row, slackable) in rows {
        let mut g = row.lg.to_vec();
        g.resize(n, 0.0);
        if *slackable {
            g[next] = -1.0;
            slack_index.push(Some(next));
            next += 1;
        } else {
            slack_index.push(None);
        }
        qp.add_row(g, -(row.lf + row.alpha_term));
    }
    let sol = qp.solve();
    if sol.status != QpStatus::Optimal {
        debug!("asif qp {:?} (residual {:.3e})", sol.status, sol.kkt_residual);
        return None;
    }
    let mut u = [0.0; 6];
    u.copy_from_slice(&sol.z[..6]);
    let active = rows
        .iter()
        .zip(&sol.multipliers)
        .filter(|(_, m)| **m > 0.0)
        .map(|((r, _), _)| r.id)
        .collect();
    let slack = rows
        .iter()
        .zip(&slack_index)
        .filter_map(|((r, _), k)| k.map(|k| (r.id, sol.z[k])))
        .collect();
    Some(Solved { u, active, slack })
}

/// Filters `u_des` at the state in `ctx`.
pub fn filter(u_des: &ControlInput, ctx: &ConstraintContext, cfg: &FilterConfig) -> FilterResult {
    let specs = ctx.model.specs(ctx.others);
    let mut rows = Vec::with_capacity(specs.len());
    let mut skipped = Vec::new();
    let mut values = Vec::with_capacity(specs.len());
    for spec in &specs {
        values.push((spec.id, value(spec.id, ctx)));
        match hocbf_compose(spec, ctx) {
            Ok(row) => rows.push((row, spec.slackable)),
            Err(Error::GradientSingularity { constraint }) => skipped.push(constraint),
            Err(e) => unreachable!("constraint evaluation: {e}"),
        }
    }
    let ud = u_des.to_array();

    if within_bounds(&ud, cfg) && rows.iter().all(|(r, _)| r.evaluate(&ud) >= 0.0) {
        let slack_values = rows.iter().filter(|(_, s)| *s).map(|(r, _)| (r.id, 0.0)).collect();
        return FilterResult {
            u_act: *u_des,
            intervened: false,
            active_constraints: Vec::new(),
            slack_values,
            skipped,
            safety_fault: false,
            stage: FilterStage::Passthrough,
            values,
        };
    }

    let (solved, stage) = match solve_rows(&ud, &rows, cfg) {
        Some(s) => (Some(s), FilterStage::Full),
        None => {
            let hard: Vec<_> = rows.iter().filter(|(_, s)| !*s).cloned().collect();
            match solve_rows(&ud, &hard, cfg) {
                Some(s) => (Some(s), FilterStage::HardOnly),
                None => (None, FilterStage::Zero),
            }
        }
    };
    match solved {
        Some(s) => {
            let u_act = ControlInput::from_array(s.u);
            FilterResult {
                intervened: u_act.max_abs_diff(u_des) > INTERVENTION_TOL,
                u_act,
                active_constraints: s.active,
                slack_values: s.slack,
                skipped,
                safety_fault: false,
                stage,
                values,
            }
        }
        None => {
            warn!("asif infeasible with hard constraints only; commanding zero control");
            FilterResult {
                u_act: ControlInput::ZERO,
                intervened: true,
                active_constraints: Vec::new(),
                slack_values: Vec::new(),
                skipped,
                safety_fault: true,
                stage,
                values,
            }
        }
    }
}

/// Record of one filtered substep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstepLog {
    /// Seconds since the start of the control interval.
    pub offset: f64,
    pub u_act: ControlInput,
    pub intervened: bool,
    pub safety_fault: bool,
    pub active_constraints: Vec<ConstraintId>,
    pub values: Vec<(ConstraintId, f64)>,
}

/// Holds `u_des` for `substeps` intervals of `dt`, filtering it at the start
/// of each one. Other deputies in `others` are held fixed.
#[allow(clippy::too_many_arguments)]
pub fn rta_substep_loop(
    u_des: &ControlInput,
    state: &DeputyState,
    sun: &SunState,
    others: &[(usize, DeputyState)],
    model: &SafetyModel,
    cfg: &FilterConfig,
    substeps: usize,
    dt: f64,
) -> Result<(DeputyState, SunState, Vec<SubstepLog>)> {
    let c: &PhysicalConstants = &model.constants;
    let mut s = *state;
    let mut sun = *sun;
    let mut logs = Vec::with_capacity(substeps);
    for k in 0..substeps {
        let ctx = ConstraintContext::new(model, &s, others, sun);
        let res = filter(u_des, &ctx, cfg);
        logs.push(SubstepLog {
            offset: k as f64 * dt,
            u_act: res.u_act,
            intervened: res.intervened,
            safety_fault: res.safety_fault,
            active_constraints: res.active_constraints,
            values: res.values,
        });
        s = step(&s, &res.u_act, &sun, dt, c)?;
        sun = sun.advance(dt, c);
    }
    Ok((s, sun, logs))
}

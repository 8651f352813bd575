//! Multi-agent episodes: initialization, the control/RTA loop, rewards,
//! termination and metrics.
//!
//! Each control step holds every agent's desired control for `control_dt`
//! and runs the filter and integrator once per `rta_dt` substep. Within a
//! substep every agent is filtered against the same snapshot of the others,
//! then all agents advance together and the chief is inspected.

mod init;
mod record;
mod reward;

pub use init::{
    attitude_admissible, initialize, random_quaternion, resolve_positions, spherical, InitialConditions,
    MAX_RESAMPLE_ATTEMPTS,
};
pub use record::{EpisodeRecord, HeaderRecord, RecordLine, StepRecord};
pub use reward::{delta_v, orientation_reward, reward_for_control, reward_step, RewardBreakdown, CRASH_PENALTY};

use std::collections::BTreeMap;
use std::fmt;

use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asif::{filter, FilterConfig};
use crate::constraints::{h_chief, value, ConstraintContext, ConstraintId, SafetyModel, SafetyParams};
use crate::dynamics::{step, ControlInput, DeputyState, DriftGrid, PhysicalConstants, SunState, Vec3};
use crate::error::{Error, Result};
use crate::inspection::{InspectionSphere, SensorModel};
use crate::observation::{encode, ObservationConfig, ObservationMode};

pub const TIME_LIMIT: f64 = 12236.0;
pub const CRASH_HORIZON: f64 = 6118.0;
pub const MAX_AGENTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub n_agents: usize,
    pub seed: u64,
    pub obs_mode: ObservationMode,
    pub rta: bool,
    pub time_limit: f64,
    pub control_dt: f64,
    pub rta_dt: f64,
    pub success_threshold: f64,
    /// Free-drift horizon of the post-task crash check, s.
    pub crash_horizon: f64,
    pub constants: PhysicalConstants,
    pub safety: SafetyParams,
}

impl EpisodeConfig {
    pub fn new(n_agents: usize, seed: u64) -> Self {
        EpisodeConfig {
            n_agents,
            seed,
            obs_mode: ObservationMode::Baseline,
            rta: true,
            time_limit: TIME_LIMIT,
            control_dt: 10.0,
            rta_dt: 1.0,
            success_threshold: 0.95,
            crash_horizon: CRASH_HORIZON,
            constants: PhysicalConstants::default(),
            safety: SafetyParams::default(),
        }
    }

    pub fn substeps(&self) -> usize {
        (self.control_dt / self.rta_dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_AGENTS).contains(&self.n_agents) {
            return Err(Error::config("agents", format!("must be between 1 and {MAX_AGENTS}")));
        }
        let positive = [
            ("time_limit", self.time_limit),
            ("control_dt", self.control_dt),
            ("rta_dt", self.rta_dt),
            ("crash_horizon", self.crash_horizon),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, "must be positive"));
            }
        }
        let ratio = self.control_dt / self.rta_dt;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::config("rta_dt", "must divide control_dt"));
        }
        if !(self.success_threshold > 0.0 && self.success_threshold <= 1.0) {
            return Err(Error::config("success_threshold", "must be in (0, 1]"));
        }
        self.constants.validate()?;
        self.safety.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationStatus {
    Running,
    Success,
    CrashAfterSuccess,
    ChiefCollision,
    DeputyCollision,
    MaxDistance,
    PowerDepleted,
    Timeout,
    IntegrationFault,
}

impl TerminationStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationStatus::Running => "running",
            TerminationStatus::Success => "success",
            TerminationStatus::CrashAfterSuccess => "crash-after-success",
            TerminationStatus::ChiefCollision => "chief-collision",
            TerminationStatus::DeputyCollision => "deputy-collision",
            TerminationStatus::MaxDistance => "max-distance",
            TerminationStatus::PowerDepleted => "power-depleted",
            TerminationStatus::Timeout => "timeout",
            TerminationStatus::IntegrationFault => "integration-fault",
        }
    }

    /// Outcomes the safety filter exists to prevent.
    pub fn is_unsafe(&self) -> bool {
        matches!(
            self,
            TerminationStatus::ChiefCollision
                | TerminationStatus::DeputyCollision
                | TerminationStatus::MaxDistance
                | TerminationStatus::PowerDepleted
        )
    }

    pub fn is_failure(&self) -> bool {
        self.is_unsafe()
            || matches!(
                self,
                TerminationStatus::CrashAfterSuccess | TerminationStatus::IntegrationFault
            )
    }
}

impl fmt::Display for TerminationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: usize,
    pub state: DeputyState,
    pub status: TerminationStatus,
    /// Weight of the points this agent inspected (`w_p`).
    pub inspected_weight: f64,
    pub total_reward: f64,
    pub delta_v: f64,
    /// Sum over control steps of the mean `|τx|+|τy|+|τz|`.
    pub torque_sum: f64,
    pub steps: u64,
    pub interventions: u64,
    pub safety_faults: u64,
}

impl Agent {
    pub fn is_live(&self) -> bool {
        self.status == TerminationStatus::Running
    }
}

/// What happened to one agent during a control step.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentStep {
    pub agent: usize,
    /// Desired control as requested, before clamping to the box.
    pub u_des: ControlInput,
    pub clipped: bool,
    /// Applied control for each executed substep.
    pub u_act: Vec<ControlInput>,
    /// Substeps where the filter changed the control.
    pub interventions: u32,
    pub safety_faults: u32,
    /// Smallest value of each constraint over the substeps.
    pub constraint_min: Vec<(ConstraintId, f64)>,
    pub reward: RewardBreakdown,
    pub state: DeputyState,
    pub status: TerminationStatus,
    pub observation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: u64,
    /// Simulation time at the end of the step.
    pub t: f64,
    pub agents: Vec<AgentStep>,
    /// Total inspected weight of the chief.
    pub inspected_weight: f64,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMetrics {
    pub agent: usize,
    pub status: TerminationStatus,
    pub success: bool,
    pub total_reward: f64,
    pub delta_v: f64,
    pub mean_torque: f64,
    pub inspected_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub agents: Vec<AgentMetrics>,
    /// Fraction of agents that ended in success.
    pub success_rate: f64,
    /// Mean over agents.
    pub total_reward: f64,
    /// Sum over agents.
    pub delta_v: f64,
    /// Mean over agents.
    pub mean_torque: f64,
    pub episode_length: f64,
    pub status: TerminationStatus,
    pub inspected_weight: f64,
    /// Smallest `h_chief` or `h_deputy` seen at any substep.
    pub min_collision_margin: f64,
    pub interventions: u64,
    pub safety_faults: u64,
}

impl EpisodeMetrics {
    pub fn success(&self) -> bool {
        self.status == TerminationStatus::Success
    }
}

#[derive(Debug, Clone)]
pub struct World {
    pub cfg: EpisodeConfig,
    pub model: SafetyModel,
    /// Tightened copy of `model` enforced by the filter.
    pub filter_model: SafetyModel,
    pub filter_cfg: FilterConfig,
    pub obs_cfg: ObservationConfig,
    pub sensor: SensorModel,
    pub agents: Vec<Agent>,
    pub sun: SunState,
    pub sphere: InspectionSphere,
    pub t: f64,
    pub step_index: u64,
    pub initial: InitialConditions,
    pub min_collision_margin: f64,
    crash_grid: DriftGrid,
}

/// Collision margins `h_chief` and `h_deputy` of every agent in `states`.
fn collision_margin(model: &SafetyModel, states: &[(usize, DeputyState)], sun: SunState) -> f64 {
    let mut worst = f64::INFINITY;
    for (i, (_, s)) in states.iter().enumerate() {
        let ctx = ConstraintContext::new(model, s, &[], sun);
        worst = worst.min(h_chief(&ctx));
        for (_, o) in &states[i + 1..] {
            worst = worst.min(crate::constraints::h_deputy_pair(model, s, o));
        }
    }
    worst
}

impl World {
    pub fn new(cfg: EpisodeConfig) -> Result<World> {
        cfg.validate()?;
        let model = SafetyModel::new(cfg.safety, cfg.constants);
        let filter_model = model.tightened();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let initial = initialize(cfg.n_agents, &mut rng, &filter_model)?;
        let agents = initial
            .deputies
            .iter()
            .enumerate()
            .map(|(id, s)| Agent {
                id,
                state: *s,
                status: TerminationStatus::Running,
                inspected_weight: 0.0,
                total_reward: 0.0,
                delta_v: 0.0,
                torque_sum: 0.0,
                steps: 0,
                interventions: 0,
                safety_faults: 0,
            })
            .collect();
        let crash_grid = DriftGrid::new(cfg.crash_horizon, cfg.rta_dt, cfg.constants.mean_motion);
        let sensor = SensorModel {
            fov: cfg.safety.fov,
            ..SensorModel::default()
        };
        let mut world = World {
            filter_cfg: FilterConfig::new(&model),
            obs_cfg: ObservationConfig::new(cfg.obs_mode),
            sensor,
            sphere: InspectionSphere::with_priority(initial.priority),
            sun: initial.sun,
            agents,
            t: 0.0,
            step_index: 0,
            initial,
            min_collision_margin: f64::INFINITY,
            crash_grid,
            model,
            filter_model,
            cfg,
        };
        let live = world.live_states();
        world.min_collision_margin = collision_margin(&world.model, &live, world.sun);
        info!(
            "episode seed {} with {} agents, mode {}, rta {}",
            cfg.seed, cfg.n_agents, cfg.obs_mode, cfg.rta
        );
        Ok(world)
    }

    pub fn live_ids(&self) -> Vec<usize> {
        self.agents.iter().filter(|a| a.is_live()).map(|a| a.id).collect()
    }

    pub fn live_states(&self) -> Vec<(usize, DeputyState)> {
        self.agents
            .iter()
            .filter(|a| a.is_live())
            .map(|a| (a.id, a.state))
            .collect()
    }

    pub fn is_done(&self) -> bool {
        self.agents.iter().all(|a| !a.is_live())
    }

    pub fn agent(&self, id: usize) -> Option<&Agent> {
        self.agents.iter().find(|a| a.id == id)
    }

    /// Observation of agent `id` against the other live agents.
    pub fn observe(&self, id: usize) -> Vec<f64> {
        let me = &self.agents[id];
        let others: Vec<DeputyState> = self
            .agents
            .iter()
            .filter(|a| a.is_live() && a.id != id)
            .map(|a| a.state)
            .collect();
        encode(
            &me.state,
            &others,
            &self.sun,
            &self.sphere,
            self.cfg.seed,
            &self.obs_cfg,
        )
    }

    pub fn observations(&self) -> BTreeMap<usize, Vec<f64>> {
        self.live_ids().into_iter().map(|id| (id, self.observe(id))).collect()
    }

    /// Whether free drift from `s` over the crash horizon enters the chief's
    /// collision radius.
    pub fn drift_collides(&self, s: &DeputyState) -> bool {
        let keep_out = self.cfg.safety.r_deputy + self.cfg.safety.r_chief;
        self.crash_grid.closest_approach(&s.trans).distance < keep_out
    }

    fn substep_status(&self, s: &DeputyState, id: usize, states: &[(usize, DeputyState)]) -> TerminationStatus {
        let p = &self.cfg.safety;
        let r = s.trans.p.norm();
        if r < p.r_chief + p.r_deputy {
            TerminationStatus::ChiefCollision
        } else if states
            .iter()
            .any(|(j, o)| *j != id && (o.trans.p - s.trans.p).norm() < 2.0 * p.r_deputy)
        {
            TerminationStatus::DeputyCollision
        } else if r > p.r_max {
            TerminationStatus::MaxDistance
        } else if s.res.energy <= 0.0 {
            TerminationStatus::PowerDepleted
        } else {
            TerminationStatus::Running
        }
    }

    /// Advances every live agent by one control step. `actions` must hold a
    /// desired control for each live agent; controls outside the box are
    /// clamped.
    pub fn step_all(&mut self, actions: &BTreeMap<usize, ControlInput>) -> Result<StepReport> {
        if self.is_done() {
            return Err(Error::Handle("episode already finished".into()));
        }
        let c = self.cfg.constants;
        let dt = self.cfg.rta_dt;
        let live = self.live_ids();
        let mut u_des = BTreeMap::new();
        for &id in &live {
            let u = actions
                .get(&id)
                .ok_or_else(|| Error::Handle(format!("missing action for agent {id}")))?;
            if !u.to_array().iter().all(|x| x.is_finite()) {
                return Err(Error::Handle(format!("non-finite action for agent {id}")));
            }
            u_des.insert(id, u.clamped(&c));
        }

        struct Acc {
            u_act: Vec<ControlInput>,
            interventions: u32,
            faults: u32,
            mins: Vec<(ConstraintId, f64)>,
            dv: f64,
            torque: f64,
            weight_before: f64,
        }
        let mut acc: BTreeMap<usize, Acc> = live
            .iter()
            .map(|&id| {
                (
                    id,
                    Acc {
                        u_act: Vec::with_capacity(self.cfg.substeps()),
                        interventions: 0,
                        faults: 0,
                        mins: Vec::new(),
                        dv: 0.0,
                        torque: 0.0,
                        weight_before: self.agents[id].inspected_weight,
                    },
                )
            })
            .collect();

        let mut active = live.clone();
        for _ in 0..self.cfg.substeps() {
            if active.is_empty() {
                break;
            }
            let snapshot: Vec<(usize, DeputyState)> = active.iter().map(|&id| (id, self.agents[id].state)).collect();
            let mut next = Vec::with_capacity(active.len());
            for (id, s) in &snapshot {
                let others: Vec<(usize, DeputyState)> = snapshot.iter().filter(|(j, _)| j != id).copied().collect();
                let ud = u_des[id];
                let ctx = ConstraintContext::new(&self.model, s, &others, self.sun);
                let u_act = if self.cfg.rta {
                    let filter_ctx = ConstraintContext::new(&self.filter_model, s, &others, self.sun);
                    let r = filter(&ud, &filter_ctx, &self.filter_cfg);
                    let a = acc.get_mut(id).expect("live agent");
                    a.interventions += u32::from(r.intervened);
                    a.faults += u32::from(r.safety_fault);
                    r.u_act
                } else {
                    ud
                };
                let values: Vec<(ConstraintId, f64)> = self
                    .model
                    .specs(&others)
                    .iter()
                    .map(|spec| (spec.id, value(spec.id, &ctx)))
                    .collect();
                let a = acc.get_mut(id).expect("live agent");
                if a.mins.is_empty() {
                    a.mins = values;
                } else {
                    for (m, (_, v)) in a.mins.iter_mut().zip(values) {
                        m.1 = m.1.min(v);
                    }
                }
                a.u_act.push(u_act);
                a.dv += delta_v(&u_act.force, dt, &c);
                a.torque += u_act.torque.abs().sum();
                next.push((*id, step(s, &u_act, &self.sun, dt, &c)));
            }
            self.sun = self.sun.advance(dt, &c);
            let mut faulted = Vec::new();
            for (id, r) in next {
                match r {
                    Ok(s) => self.agents[id].state = s,
                    Err(e) => {
                        debug!("agent {id}: {e}");
                        faulted.push(id);
                    }
                }
            }

            let states: Vec<(usize, DeputyState)> = active.iter().map(|&id| (id, self.agents[id].state)).collect();
            self.min_collision_margin = self
                .min_collision_margin
                .min(collision_margin(&self.model, &states, self.sun));

            let deputies: Vec<DeputyState> = states.iter().map(|(_, s)| *s).collect();
            let credit = self.sphere.inspect_step(&deputies, &self.sun, &self.sensor);
            for ((id, _), seen) in states.iter().zip(credit) {
                self.agents[*id].inspected_weight += self.sphere.weight_of(&seen);
            }

            for (id, s) in &states {
                let status = if faulted.contains(id) {
                    TerminationStatus::IntegrationFault
                } else {
                    self.substep_status(s, *id, &states)
                };
                if status != TerminationStatus::Running {
                    info!("agent {id} terminated at t={:.0}: {status}", self.t);
                    self.agents[*id].status = status;
                }
            }
            active.retain(|id| self.agents[*id].is_live());
        }

        self.t += self.cfg.control_dt;
        self.step_index += 1;
        let total_weight = self.sphere.inspected_weight();
        let task_complete = total_weight >= self.cfg.success_threshold;
        let timed_out = self.t + self.cfg.control_dt > self.cfg.time_limit;

        let mut reports = Vec::with_capacity(live.len());
        for &id in &live {
            let a = acc.remove(&id).expect("live agent");
            let executed = a.u_act.len().max(1) as f64;
            let torque_l1 = a.torque / executed;
            let agent = &self.agents[id];
            let state = agent.state;
            let w_p = agent.inspected_weight;
            let crash = w_p >= self.cfg.success_threshold && self.drift_collides(&state);
            let reward = reward_step(w_p - a.weight_before, a.dv, torque_l1, &state, crash);

            let mut status = agent.status;
            if status == TerminationStatus::Running {
                if task_complete {
                    status = if self.drift_collides(&state) {
                        TerminationStatus::CrashAfterSuccess
                    } else {
                        TerminationStatus::Success
                    };
                } else if timed_out {
                    status = TerminationStatus::Timeout;
                }
            }
            let agent = &mut self.agents[id];
            agent.status = status;
            agent.total_reward += reward.total;
            agent.delta_v += a.dv;
            agent.torque_sum += torque_l1;
            agent.steps += 1;
            agent.interventions += u64::from(a.interventions);
            agent.safety_faults += u64::from(a.faults);
            reports.push(AgentStep {
                agent: id,
                u_des: actions[&id],
                clipped: actions[&id] != u_des[&id],
                u_act: a.u_act,
                interventions: a.interventions,
                safety_faults: a.faults,
                constraint_min: a.mins,
                reward,
                state,
                status,
                observation: Vec::new(),
            });
        }
        // after every status is settled, so all observers see the same live set
        for r in &mut reports {
            let me = &self.agents[r.agent];
            let others: Vec<DeputyState> = self
                .agents
                .iter()
                .filter(|a| a.id != r.agent && a.is_live())
                .map(|a| a.state)
                .collect();
            r.observation = encode(
                &me.state,
                &others,
                &self.sun,
                &self.sphere,
                self.cfg.seed,
                &self.obs_cfg,
            );
        }
        Ok(StepReport {
            step: self.step_index,
            t: self.t,
            agents: reports,
            inspected_weight: total_weight,
            done: self.is_done(),
        })
    }

    pub fn metrics(&self) -> EpisodeMetrics {
        let agents: Vec<AgentMetrics> = self
            .agents
            .iter()
            .map(|a| AgentMetrics {
                agent: a.id,
                status: a.status,
                success: a.status == TerminationStatus::Success,
                total_reward: a.total_reward,
                delta_v: a.delta_v,
                mean_torque: if a.steps > 0 {
                    a.torque_sum / a.steps as f64
                } else {
                    0.0
                },
                inspected_weight: a.inspected_weight,
            })
            .collect();
        let n = agents.len() as f64;
        let status = if agents.iter().all(|a| a.success) {
            TerminationStatus::Success
        } else {
            agents
                .iter()
                .map(|a| a.status)
                .find(|s| *s != TerminationStatus::Success)
                .unwrap_or(TerminationStatus::Running)
        };
        EpisodeMetrics {
            success_rate: agents.iter().filter(|a| a.success).count() as f64 / n,
            total_reward: agents.iter().map(|a| a.total_reward).sum::<f64>() / n,
            delta_v: agents.iter().map(|a| a.delta_v).sum(),
            mean_torque: agents.iter().map(|a| a.mean_torque).sum::<f64>() / n,
            episode_length: self.t,
            status,
            inspected_weight: self.sphere.inspected_weight(),
            min_collision_margin: self.min_collision_margin,
            interventions: self.agents.iter().map(|a| a.interventions).sum(),
            safety_faults: self.agents.iter().map(|a| a.safety_faults).sum(),
            agents,
        }
    }

    /// Hill-frame sensor boresight of agent `id`.
    pub fn boresight(&self, id: usize) -> Vec3 {
        self.agents[id].state.att.q.rotate(&self.sensor.boresight_body)
    }
}

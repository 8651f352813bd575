//! Reset/step/close interface for external drivers such as RL libraries.
//!
//! All simulation happens in [`World::step_all`]; this layer only moves
//! actions in and observations, rewards and flags out. An agent that
//! terminates is reported once with its terminal observation and
//! `done = true`, and is left out of every later step.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::ControlInput;
use crate::episode::{EpisodeConfig, EpisodeRecord, RewardBreakdown, TerminationStatus, World};
use crate::error::{Error, Result};

/// Version of the simulation core, including the source hash.
pub fn version() -> &'static str {
    crate::VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentInfo {
    pub reward: RewardBreakdown,
    /// The requested action was outside the control box and was clipped.
    pub clipped: bool,
    /// Substeps where the filter changed the control.
    pub interventions: u32,
    pub safety_faults: u32,
    pub status: TerminationStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub observations: BTreeMap<usize, Vec<f64>>,
    pub rewards: BTreeMap<usize, f64>,
    pub dones: BTreeMap<usize, bool>,
    pub infos: BTreeMap<usize, AgentInfo>,
    /// Every agent has terminated.
    pub episode_done: bool,
}

#[derive(Debug)]
pub struct Env {
    world: Option<World>,
    record: EpisodeRecord,
}

impl Env {
    /// Starts an episode with `cfg` and `seed` and returns the initial
    /// observation of every agent.
    pub fn reset(cfg: &EpisodeConfig, seed: u64) -> Result<(Env, BTreeMap<usize, Vec<f64>>)> {
        let mut cfg = *cfg;
        cfg.seed = seed;
        let world = World::new(cfg)?;
        let obs = world.observations();
        let record = EpisodeRecord::new(&world);
        Ok((
            Env {
                world: Some(world),
                record,
            },
            obs,
        ))
    }

    /// Read-only view of the simulation, for scripted drivers.
    pub fn world(&self) -> Result<&World> {
        self.world
            .as_ref()
            .ok_or_else(|| Error::Handle("handle is closed".into()))
    }

    pub fn config(&self) -> Result<EpisodeConfig> {
        Ok(self.world()?.cfg)
    }

    pub fn observation_len(&self) -> Result<usize> {
        Ok(self.world()?.cfg.obs_mode.len())
    }

    /// Agents that still expect an action.
    pub fn live_agents(&self) -> Result<Vec<usize>> {
        Ok(self.world()?.live_ids())
    }

    pub fn is_done(&self) -> Result<bool> {
        Ok(self.world()?.is_done())
    }

    /// Advances one control step. `actions` needs a finite 6-vector
    /// `[Fx, Fy, Fz, τx, τy, τz]` for every live agent.
    pub fn step(&mut self, actions: &BTreeMap<usize, [f64; 6]>) -> Result<Transition> {
        let world = self
            .world
            .as_mut()
            .ok_or_else(|| Error::Handle("handle is closed".into()))?;
        if world.is_done() {
            return Err(Error::Handle("episode is over; call reset".into()));
        }
        if let Some(id) = actions
            .keys()
            .find(|id| !world.agent(**id).is_some_and(|a| a.is_live()))
        {
            return Err(Error::Handle(format!("action for agent {id}, which is not live")));
        }
        let u: BTreeMap<usize, ControlInput> = actions
            .iter()
            .map(|(id, a)| (*id, ControlInput::from_array(*a)))
            .collect();
        let report = world.step_all(&u)?;
        self.record.push(&report);
        if report.done {
            self.record.finish(&world.metrics());
        }

        let mut out = Transition {
            observations: BTreeMap::new(),
            rewards: BTreeMap::new(),
            dones: BTreeMap::new(),
            infos: BTreeMap::new(),
            episode_done: report.done,
        };
        for a in report.agents {
            out.rewards.insert(a.agent, a.reward.total);
            out.dones.insert(a.agent, a.status != TerminationStatus::Running);
            out.infos.insert(
                a.agent,
                AgentInfo {
                    reward: a.reward,
                    clipped: a.clipped,
                    interventions: a.interventions,
                    safety_faults: a.safety_faults,
                    status: a.status,
                },
            );
            out.observations.insert(a.agent, a.observation);
        }
        Ok(out)
    }

    /// Log of the episode so far.
    pub fn record(&self) -> &EpisodeRecord {
        &self.record
    }

    /// Invalidates the handle and hands back the episode log.
    pub fn close(&mut self) -> Result<EpisodeRecord> {
        self.world
            .take()
            .ok_or_else(|| Error::Handle("handle is already closed".into()))?;
        Ok(std::mem::take(&mut self.record))
    }
}

//! Replayable episode log: a header line, one line per (step, agent) and a
//! closing summary, serialized as JSON lines.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;

use super::{EpisodeConfig, EpisodeMetrics, RewardBreakdown, StepReport, TerminationStatus, World};
use crate::dynamics::{DeputyState, SunState, Vec3};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderRecord {
    pub version: String,
    pub config: EpisodeConfig,
    pub sun: SunState,
    pub priority: Vec3,
    pub initial: Vec<DeputyState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub t: f64,
    pub agent: usize,
    pub status: TerminationStatus,
    pub state: DeputyState,
    pub u_des: [f64; 6],
    pub clipped: bool,
    pub u_act: Vec<[f64; 6]>,
    pub interventions: u32,
    pub safety_faults: u32,
    /// Smallest value of each constraint over the step's substeps.
    pub constraint_min: Vec<(String, f64)>,
    pub reward: RewardBreakdown,
    pub inspected_weight: f64,
    pub observation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecordLine {
    Header(HeaderRecord),
    Step(StepRecord),
    Summary(EpisodeMetrics),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeRecord {
    pub lines: Vec<RecordLine>,
}

impl EpisodeRecord {
    /// Starts a record for a freshly initialized world.
    pub fn new(world: &World) -> Self {
        let header = HeaderRecord {
            version: crate::VERSION.to_string(),
            config: world.cfg,
            sun: world.initial.sun,
            priority: world.initial.priority,
            initial: world.initial.deputies.clone(),
        };
        EpisodeRecord {
            lines: vec![RecordLine::Header(header)],
        }
    }

    pub fn push(&mut self, report: &StepReport) {
        for a in &report.agents {
            self.lines.push(RecordLine::Step(StepRecord {
                step: report.step,
                t: report.t,
                agent: a.agent,
                status: a.status,
                state: a.state,
                u_des: a.u_des.to_array(),
                clipped: a.clipped,
                u_act: a.u_act.iter().map(|u| u.to_array()).collect(),
                interventions: a.interventions,
                safety_faults: a.safety_faults,
                constraint_min: a.constraint_min.iter().map(|(id, v)| (id.to_string(), *v)).collect(),
                reward: a.reward,
                inspected_weight: report.inspected_weight,
                observation: a.observation.clone(),
            }));
        }
    }

    pub fn finish(&mut self, metrics: &EpisodeMetrics) {
        self.lines.push(RecordLine::Summary(metrics.clone()));
    }

    pub fn steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.lines.iter().filter_map(|l| match l {
            RecordLine::Step(s) => Some(s),
            _ => None,
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for line in &self.lines {
            serde_json::to_writer(&mut w, line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        buf
    }

    /// Hex SHA-256 of the JSONL bytes.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        self.write_jsonl(HashWriter(&mut h)).expect("hashing");
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

struct HashWriter<'a>(&'a mut Sha256);

impl Write for HashWriter<'_> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

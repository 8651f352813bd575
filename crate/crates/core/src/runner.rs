//! Driving episodes with the scripted controllers, and seed sweeps.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ResolvedConfig;
use crate::controllers::{AgentView, ControllerSpec};
use crate::dynamics::ControlInput;
use crate::episode::{EpisodeConfig, EpisodeMetrics, EpisodeRecord, World};
use crate::error::Result;
use crate::observation::ObservationMode;

#[derive(Debug, Clone)]
pub struct EpisodeOutput {
    pub metrics: EpisodeMetrics,
    pub record: Option<EpisodeRecord>,
}

/// Desired controls of every live agent for the current step.
pub fn controller_actions(world: &World, controller: &ControllerSpec) -> BTreeMap<usize, ControlInput> {
    let live = world.live_states();
    live.iter()
        .map(|(id, s)| {
            let others: Vec<_> = live.iter().filter(|(j, _)| j != id).copied().collect();
            let view = AgentView {
                agent: *id,
                step: world.step_index,
                state: s,
                others: &others,
                sphere: &world.sphere,
                sun: world.sun,
                constants: &world.cfg.constants,
                cluster_seed: world.cfg.seed,
            };
            (*id, controller.command(&view))
        })
        .collect()
}

/// Runs one episode to completion. With `record` set the full per-step log
/// is kept.
pub fn run_episode(cfg: &EpisodeConfig, controller: &ControllerSpec, record: bool) -> Result<EpisodeOutput> {
    let mut world = World::new(*cfg)?;
    let mut log = record.then(|| EpisodeRecord::new(&world));
    while !world.is_done() {
        let actions = controller_actions(&world, controller);
        let report = world.step_all(&actions)?;
        if let Some(log) = log.as_mut() {
            log.push(&report);
        }
    }
    let metrics = world.metrics();
    if let Some(log) = log.as_mut() {
        log.finish(&metrics);
    }
    Ok(EpisodeOutput { metrics, record: log })
}

/// One line of `metrics.csv`. Numeric fields are empty when the episode
/// faulted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub episode_id: usize,
    pub seed: u64,
    pub mode: ObservationMode,
    pub n_agents: usize,
    /// Fraction of agents that succeeded.
    pub success: Option<f64>,
    pub total_reward: Option<f64>,
    pub delta_v: Option<f64>,
    pub mean_torque: Option<f64>,
    pub episode_length_s: Option<f64>,
    pub termination_status: String,
}

impl MetricsRow {
    pub fn new(episode_id: usize, cfg: &EpisodeConfig, outcome: &Result<EpisodeMetrics>) -> Self {
        let mut row = MetricsRow {
            episode_id,
            seed: cfg.seed,
            mode: cfg.obs_mode,
            n_agents: cfg.n_agents,
            success: None,
            total_reward: None,
            delta_v: None,
            mean_torque: None,
            episode_length_s: None,
            termination_status: "fault".to_string(),
        };
        if let Ok(m) = outcome {
            row.success = Some(m.success_rate);
            row.total_reward = Some(m.total_reward);
            row.delta_v = Some(m.delta_v);
            row.mean_torque = Some(m.mean_torque);
            row.episode_length_s = Some(m.episode_length);
            row.termination_status = m.status.to_string();
        }
        row
    }
}

/// Per-cell means over the episodes of a sweep that did not fault.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub mode: ObservationMode,
    pub n_agents: usize,
    pub episodes: usize,
    pub faults: usize,
    pub success_rate: f64,
    pub total_reward: f64,
    pub delta_v: f64,
    pub mean_torque: f64,
    pub episode_length_s: f64,
}

pub fn summarize(rows: &[MetricsRow]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(usize, usize), Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        let mode = ObservationMode::ALL
            .iter()
            .position(|m| *m == r.mode)
            .expect("known mode");
        cells.entry((mode, r.n_agents)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((mode, n_agents), rows)| {
            let ok: Vec<_> = rows.iter().filter(|r| r.success.is_some()).collect();
            let mean = |f: fn(&MetricsRow) -> Option<f64>| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().filter_map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            SummaryRow {
                mode: ObservationMode::ALL[mode],
                n_agents,
                episodes: rows.len(),
                faults: rows.len() - ok.len(),
                success_rate: mean(|r| r.success),
                total_reward: mean(|r| r.total_reward),
                delta_v: mean(|r| r.delta_v),
                mean_torque: mean(|r| r.mean_torque),
                episode_length_s: mean(|r| r.episode_length_s),
            }
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Provenance written as `manifest.json` next to every run or sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest<'a> {
    pub version: &'static str,
    pub subcommand: &'a str,
    pub config_path: Option<&'a Path>,
    pub out: &'a Path,
    pub resolved: &'a ResolvedConfig,
}

fn write_manifest(subcommand: &str, cfg: &ResolvedConfig, config_path: Option<&Path>, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let manifest = RunManifest {
        version: crate::VERSION,
        subcommand,
        config_path,
        out,
        resolved: cfg,
    };
    fs::write(out.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(())
}

/// What a `run` wrote.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: EpisodeMetrics,
    pub row: MetricsRow,
    pub digest: String,
    pub record_path: PathBuf,
}

/// Runs one episode and writes `episode.jsonl`, `metrics.csv` and
/// `manifest.json` into `out`.
pub fn run_to_dir(cfg: &ResolvedConfig, out: &Path, config_path: Option<&Path>) -> Result<RunOutput> {
    write_manifest("run", cfg, config_path, out)?;
    let result = run_episode(&cfg.episode, &cfg.controller, true)?;
    let record = result.record.expect("recording was requested");
    let record_path = out.join("episode.jsonl");
    let mut w = BufWriter::new(File::create(&record_path)?);
    record.write_jsonl(&mut w)?;
    w.flush()?;
    let row = MetricsRow::new(0, &cfg.episode, &Ok(result.metrics.clone()));
    write_csv(&out.join("metrics.csv"), std::slice::from_ref(&row))?;
    Ok(RunOutput {
        metrics: result.metrics,
        row,
        digest: record.digest(),
        record_path,
    })
}

/// Episode configurations of a sweep in grid order: mode, then agent count,
/// then seed.
pub fn sweep_cells(cfg: &ResolvedConfig) -> Vec<EpisodeConfig> {
    let g = &cfg.sweep;
    let mut cells = Vec::with_capacity(g.len());
    for &mode in &g.modes {
        for &n in &g.agents {
            for &seed in &g.seeds {
                let mut e = cfg.episode;
                e.obs_mode = mode;
                e.n_agents = n;
                e.seed = seed;
                cells.push(e);
            }
        }
    }
    cells
}

/// Runs every cell of the sweep grid and writes `metrics.csv` and
/// `summary.csv` into `out`. A faulting episode is logged and recorded in its
/// row.
pub fn sweep(
    cfg: &ResolvedConfig,
    out: &Path,
    config_path: Option<&Path>,
) -> Result<(Vec<MetricsRow>, Vec<SummaryRow>)> {
    write_manifest("sweep", cfg, config_path, out)?;
    let cells = sweep_cells(cfg);
    let rows: Vec<MetricsRow> = cells
        .par_iter()
        .enumerate()
        .map(|(id, e)| {
            let mut controller = cfg.controller;
            controller.seed = e.seed;
            let outcome = run_episode(e, &controller, false).map(|o| o.metrics);
            if let Err(err) = &outcome {
                warn!(
                    "episode {id} (seed {}, {}, {} agents) faulted: {err}",
                    e.seed, e.obs_mode, e.n_agents
                );
            } else {
                info!("episode {id} done");
            }
            MetricsRow::new(id, e, &outcome)
        })
        .collect();
    let summary = summarize(&rows);
    write_csv(&out.join("metrics.csv"), &rows)?;
    write_csv(&out.join("summary.csv"), &summary)?;
    Ok((rows, summary))
}

//! Driving the simulator through the reset/step/close interface the way an
//! RL library would, with a deliberately oversized action.

use std::collections::BTreeMap;

use inspect_rta::env::{version, Env};
use inspect_rta::episode::EpisodeConfig;
use inspect_rta::observation::ObservationMode;

fn main() -> inspect_rta::Result<()> {
    let mut cfg = EpisodeConfig::new(2, 0);
    cfg.obs_mode = ObservationMode::OctDist;
    let (mut env, obs) = Env::reset(&cfg, 11)?;
    println!("core {}  observation length {}", version(), env.observation_len()?);
    for (id, o) in &obs {
        println!("agent {id}: |p| {:.3} (normalized)", o[0]);
    }

    let mut returns: BTreeMap<usize, f64> = BTreeMap::new();
    let mut steps = 0;
    while !env.is_done()? {
        let actions: BTreeMap<usize, [f64; 6]> = env
            .live_agents()?
            .into_iter()
            .map(|id| (id, [5.0, 0.0, 0.0, 0.0, 0.0, 0.0]))
            .collect();
        let tr = env.step(&actions)?;
        if steps == 0 {
            println!(
                "first step clipped: {:?}",
                tr.infos.values().map(|i| i.clipped).collect::<Vec<_>>()
            );
        }
        for (id, r) in &tr.rewards {
            *returns.entry(*id).or_default() += r;
        }
        for (id, info) in &tr.infos {
            if tr.dones[id] {
                println!("agent {id} done after {} steps: {}", steps + 1, info.status);
            }
        }
        steps += 1;
    }
    let record = env.close()?;
    println!("returns {returns:.4?}");
    println!("record {} lines, sha256 {}", record.lines.len(), record.digest());
    assert!(env.step(&BTreeMap::new()).is_err());
    Ok(())
}

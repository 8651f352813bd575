//! A small evaluation grid written to a directory: per-episode metrics and a
//! per-cell summary.
//!
//! Usage: sweep_grid [out-dir]

use inspect_rta::config::{ConfigFile, ResolvedConfig};
use inspect_rta::runner::sweep;

fn main() -> inspect_rta::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/sweep".into());
    let file = ConfigFile::parse(
        r#"
        controller = "inspect-seeker"
        sweep_modes = ["baseline", "oct-count", "points-dist"]
        sweep_agents = [1, 3]
        sweep_seeds = [0, 1]
        "#,
    )?;
    let cfg = file.apply(&ResolvedConfig::default());
    cfg.validate()?;
    let (rows, summary) = sweep(&cfg, out.as_ref(), None)?;
    println!("{} episodes -> {out}", rows.len());
    for s in summary {
        println!(
            "{:<12} {} agents  success {:.2}  reward {:>8.4}  delta-v {:>7.2}  length {:>6.0} s",
            s.mode.to_string(),
            s.n_agents,
            s.success_rate,
            s.total_reward,
            s.delta_v,
            s.episode_length_s
        );
    }
    Ok(())
}

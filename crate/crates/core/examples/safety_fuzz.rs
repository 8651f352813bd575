//! Adversarial and random controllers against the filter over a batch of
//! seeds, reporting the worst collision margin seen.
//!
//! Usage: safety_fuzz [episodes] [agents]

use inspect_rta::controllers::{ControllerKind, ControllerSpec};
use inspect_rta::episode::EpisodeConfig;
use inspect_rta::runner::run_episode;

fn main() {
    let mut args = std::env::args().skip(1);
    let episodes: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let agents: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);

    for kind in [ControllerKind::Adversarial, ControllerKind::Random] {
        for rta in [true, false] {
            let mut worst = f64::INFINITY;
            let mut unsafe_ends = 0;
            let mut faults = 0;
            for seed in 0..episodes {
                let mut cfg = EpisodeConfig::new(agents, seed);
                cfg.rta = rta;
                let m = run_episode(&cfg, &ControllerSpec::new(kind, seed), false)
                    .expect("episode")
                    .metrics;
                worst = worst.min(m.min_collision_margin);
                unsafe_ends += m.agents.iter().filter(|a| a.status.is_unsafe()).count();
                faults += m.safety_faults;
            }
            println!(
                "{kind:<12} rta {:<3}  worst margin {worst:>9.4}  unsafe terminations {unsafe_ends:>3}  filter faults {faults}",
                if rta { "on" } else { "off" }
            );
        }
    }
}

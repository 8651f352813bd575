use inspect_rta::controllers::{ControllerKind, ControllerSpec};
use inspect_rta::episode::EpisodeConfig;
use inspect_rta::runner::run_episode;
use std::time::Instant;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let kind = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(ControllerKind::InspectSeeker);
    let cfg = EpisodeConfig::new(3, seed);
    let start = Instant::now();
    let out = run_episode(&cfg, &ControllerSpec::new(kind, seed), false).expect("episode");
    let m = &out.metrics;
    println!(
        "seed {seed}: {} after {:.0} s, inspected {:.3}, delta-v {:.2} m/s, min collision margin {:.4}, {} interventions ({:.1} s wall)",
        m.status,
        m.episode_length,
        m.inspected_weight,
        m.delta_v,
        m.min_collision_margin,
        m.interventions,
        start.elapsed().as_secs_f64()
    );
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

use inspect_rta::config::ResolvedConfig;
use inspect_rta::controllers::ControllerKind;
use inspect_rta::observation::ObservationMode;
use inspect_rta::runner::{run_to_dir, sweep};

#[derive(Parser)]
#[command(name = "inspect-rta", version = inspect_rta::VERSION, about = "Multi-agent spacecraft inspection with run time assurance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its log and metrics.
    Run(Common),
    /// Run every mode × agent count × seed cell and write metrics tables.
    Sweep(Common),
    /// Check a configuration file and print the resolved configuration.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Episode seed; for a sweep, the only seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Agent count; for a sweep, the only count.
    #[arg(long)]
    agents: Option<usize>,
    /// Observation mode; for a sweep, the only mode.
    #[arg(long, value_parser = parse_mode)]
    obs_mode: Option<ObservationMode>,
    #[arg(long, value_parser = parse_controller)]
    controller: Option<ControllerKind>,
    #[arg(long, value_enum)]
    rta: Option<Switch>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_mode(s: &str) -> Result<ObservationMode, String> {
    s.parse()
}

fn parse_controller(s: &str) -> Result<ControllerKind, String> {
    s.parse()
}

impl Common {
    fn resolve(&self) -> inspect_rta::Result<ResolvedConfig> {
        let mut r = match &self.config {
            Some(path) => ResolvedConfig::from_file(path)?,
            None => ResolvedConfig::default(),
        };
        if let Some(seed) = self.seed {
            r.episode.seed = seed;
            r.controller.seed = seed;
            r.sweep.seeds = vec![seed];
        }
        if let Some(n) = self.agents {
            r.episode.n_agents = n;
            r.sweep.agents = vec![n];
        }
        if let Some(mode) = self.obs_mode {
            r.episode.obs_mode = mode;
            r.sweep.modes = vec![mode];
        }
        if let Some(kind) = self.controller {
            r.controller.kind = kind;
        }
        if let Some(rta) = self.rta {
            r.episode.rta = matches!(rta, Switch::On);
        }
        r.validate()?;
        Ok(r)
    }
}

fn execute(cli: Cli) -> inspect_rta::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let out = run_to_dir(&cfg, &args.out, args.config.as_deref())?;
            let m = &out.metrics;
            println!(
                "{}: {:.0} s, inspected {:.3}, reward {:.4}, delta-v {:.3} m/s, {} interventions",
                m.status, m.episode_length, m.inspected_weight, m.total_reward, m.delta_v, m.interventions
            );
            println!("record {} sha256 {}", out.record_path.display(), out.digest);
        }
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            let (rows, summary) = sweep(&cfg, &args.out, args.config.as_deref())?;
            println!("{} episodes written to {}", rows.len(), args.out.display());
            for s in summary {
                println!(
                    "{:>12} {} agents: success {:.2}, reward {:.4}, delta-v {:.2} m/s ({} faults)",
                    s.mode.to_string(),
                    s.n_agents,
                    s.success_rate,
                    s.total_reward,
                    s.delta_v,
                    s.faults
                );
            }
        }
        Command::ValidateConfig { config } => {
            let cfg = ResolvedConfig::from_file(&config)?;
            println!("{}", serde_json::to_string_pretty(&cfg)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("INSPECT_RTA_LOG_LEVEL", "warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! Flat TOML run configuration. Every key is optional; missing keys keep the
//! defaults. Command-line flags are applied on top of the file.
//!
//! ```toml
//! agents = 3
//! seed = 7
//! obs_mode = "points-dist"
//! controller = "inspect-seeker"
//! rta = true
//! mass = 12.0
//! standoff = 40.0
//! sweep_modes = ["baseline", "oct-count"]
//! sweep_agents = [1, 3, 5]
//! sweep_seeds = [0, 1, 2]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controllers::{ControllerKind, ControllerSpec};
use crate::dynamics::Vec3;
use crate::episode::{EpisodeConfig, MAX_AGENTS};
use crate::error::{Error, Result};
use crate::observation::ObservationMode;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub agents: Option<usize>,
    pub seed: Option<u64>,
    pub obs_mode: Option<ObservationMode>,
    pub controller: Option<ControllerKind>,
    pub rta: Option<bool>,
    pub time_limit: Option<f64>,
    pub control_dt: Option<f64>,
    pub rta_dt: Option<f64>,
    pub success_threshold: Option<f64>,
    pub crash_horizon: Option<f64>,

    pub mass: Option<f64>,
    pub mean_motion: Option<f64>,
    pub thrust_max: Option<f64>,
    pub inertia: Option<[f64; 3]>,
    pub torque_max: Option<f64>,
    pub solar_constant: Option<f64>,
    pub albedo_factor: Option<f64>,
    pub stefan_boltzmann: Option<f64>,
    pub earth_temperature: Option<f64>,
    pub node_mass: Option<f64>,
    pub node_area: Option<f64>,
    pub node_specific_heat: Option<f64>,
    pub node_absorptivity: Option<f64>,
    pub node_emissivity: Option<f64>,
    pub node_normal: Option<[f64; 3]>,
    pub panel_ideal_performance: Option<f64>,
    pub panel_degradation: Option<f64>,
    pub panel_area: Option<f64>,
    pub panel_normal: Option<[f64; 3]>,
    pub power_out: Option<f64>,

    pub r_deputy: Option<f64>,
    pub r_chief: Option<f64>,
    pub nu0: Option<f64>,
    pub nu1_orbits: Option<f64>,
    pub r_max: Option<f64>,
    pub psm_horizon: Option<f64>,
    pub psm_dt: Option<f64>,
    pub v_max: Option<f64>,
    pub omega_max: Option<f64>,
    pub fov: Option<f64>,
    pub ez_buffer: Option<f64>,
    pub temp_max: Option<f64>,
    pub delta0: Option<f64>,
    pub delta1: Option<f64>,
    pub energy_min: Option<f64>,
    pub delta2: Option<f64>,
    pub slack_weight: Option<f64>,
    pub alpha_first_order: Option<f64>,
    pub alpha_high_order: Option<[f64; 2]>,
    pub alpha_battery: Option<[f64; 2]>,
    pub collision_buffer: Option<f64>,
    pub braking_fraction: Option<f64>,

    pub position_kp: Option<f64>,
    pub position_kd: Option<f64>,
    pub attitude_kp: Option<f64>,
    pub attitude_kd: Option<f64>,
    pub standoff: Option<f64>,

    pub sweep_modes: Option<Vec<ObservationMode>>,
    pub sweep_agents: Option<Vec<usize>>,
    pub sweep_seeds: Option<Vec<u64>>,
}

/// Cells of a sweep: every mode × agent count × seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub modes: Vec<ObservationMode>,
    pub agents: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            modes: ObservationMode::ALL.to_vec(),
            agents: (1..=MAX_AGENTS).collect(),
            seeds: (0..5).collect(),
        }
    }
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.modes.len() * self.agents.len() * self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything a run or sweep needs after defaults, file and flags are merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub episode: EpisodeConfig,
    pub controller: ControllerSpec,
    pub sweep: SweepGrid,
}

impl Default for ResolvedConfig {
    fn default() -> Self {
        ResolvedConfig {
            episode: EpisodeConfig::new(3, 0),
            controller: ControllerSpec::new(ControllerKind::InspectSeeker, 0),
            sweep: SweepGrid::default(),
        }
    }
}

/// Name of the key on the line holding byte offset `at`.
fn key_at(text: &str, at: usize) -> Option<String> {
    let start = text[..at.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next()?;
    let (key, _) = line.split_once('=')?;
    Some(key.trim().to_string())
}

fn unknown_field(message: &str) -> Option<String> {
    let rest = message.split("unknown field `").nth(1)?;
    Some(rest.split('`').next()?.to_string())
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        toml::from_str(text).map_err(|e| {
            let field = unknown_field(e.message())
                .or_else(|| e.span().and_then(|s| key_at(text, s.start)))
                .unwrap_or_else(|| "config".to_string());
            Error::config(field, e.message().trim())
        })
    }

    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Applies the keys present in the file to `base`.
    pub fn apply(&self, base: &ResolvedConfig) -> ResolvedConfig {
        let mut r = base.clone();
        macro_rules! set {
            ($($src:ident => $dst:expr),* $(,)?) => {
                $(if let Some(v) = self.$src.clone() { $dst = v; })*
            };
        }
        let e = &mut r.episode;
        set! {
            agents => e.n_agents,
            seed => e.seed,
            obs_mode => e.obs_mode,
            rta => e.rta,
            time_limit => e.time_limit,
            control_dt => e.control_dt,
            rta_dt => e.rta_dt,
            success_threshold => e.success_threshold,
            crash_horizon => e.crash_horizon,
        }
        let c = &mut e.constants;
        set! {
            mass => c.mass,
            mean_motion => c.mean_motion,
            thrust_max => c.thrust_max,
            torque_max => c.torque_max,
            solar_constant => c.solar_constant,
            albedo_factor => c.albedo_factor,
            stefan_boltzmann => c.stefan_boltzmann,
            earth_temperature => c.earth_temperature,
            node_mass => c.node.mass,
            node_area => c.node.area,
            node_specific_heat => c.node.specific_heat,
            node_absorptivity => c.node.absorptivity,
            node_emissivity => c.node.emissivity,
            panel_ideal_performance => c.panel.ideal_performance,
            panel_degradation => c.panel.degradation,
            panel_area => c.panel.area,
            power_out => c.power_out,
        }
        if let Some(v) = self.inertia {
            c.inertia = Vec3::from(v);
        }
        if let Some(v) = self.node_normal {
            c.node.normal_body = Vec3::from(v);
        }
        if let Some(v) = self.panel_normal {
            c.panel.normal_body = Vec3::from(v);
        }
        let s = &mut e.safety;
        set! {
            r_deputy => s.r_deputy,
            r_chief => s.r_chief,
            nu0 => s.nu0,
            nu1_orbits => s.nu1_orbits,
            r_max => s.r_max,
            psm_horizon => s.psm_horizon,
            psm_dt => s.psm_dt,
            v_max => s.v_max,
            omega_max => s.omega_max,
            fov => s.fov,
            ez_buffer => s.ez_buffer,
            temp_max => s.temp_max,
            delta0 => s.delta0,
            delta1 => s.delta1,
            energy_min => s.energy_min,
            delta2 => s.delta2,
            slack_weight => s.slack_weight,
            alpha_first_order => s.alpha_first_order,
            alpha_high_order => s.alpha_high_order,
            alpha_battery => s.alpha_battery,
            collision_buffer => s.collision_buffer,
            braking_fraction => s.braking_fraction,
        }
        let k = &mut r.controller;
        set! {
            controller => k.kind,
            position_kp => k.gains.position_kp,
            position_kd => k.gains.position_kd,
            attitude_kp => k.gains.attitude_kp,
            attitude_kd => k.gains.attitude_kd,
            standoff => k.gains.standoff,
        }
        k.seed = r.episode.seed;
        let g = &mut r.sweep;
        set! {
            sweep_modes => g.modes,
            sweep_agents => g.agents,
            sweep_seeds => g.seeds,
        }
        r
    }
}

impl ResolvedConfig {
    pub fn from_file(path: &Path) -> Result<ResolvedConfig> {
        let r = ConfigFile::load(path)?.apply(&ResolvedConfig::default());
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        self.episode.validate()?;
        let g = &self.controller.gains;
        let gains = [
            ("position_kp", g.position_kp),
            ("position_kd", g.position_kd),
            ("attitude_kp", g.attitude_kp),
            ("attitude_kd", g.attitude_kd),
            ("standoff", g.standoff),
        ];
        for (field, v) in gains {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(field, "must be non-negative"));
            }
        }
        if self.sweep.is_empty() {
            return Err(Error::config("sweep_seeds", "sweep grid is empty"));
        }
        if let Some(n) = self.sweep.agents.iter().find(|n| !(1..=MAX_AGENTS).contains(*n)) {
            return Err(Error::config(
                "sweep_agents",
                format!("{n} is not between 1 and {MAX_AGENTS}"),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_keeps_defaults() {
        let r = ConfigFile::parse("").unwrap().apply(&ResolvedConfig::default());
        assert_eq!(r, ResolvedConfig::default());
    }

    #[test]
    fn keys_reach_their_targets() {
        let text = r#"
agents = 5
obs_mode = "oct-dist"
controller = "random"
seed = 11
mass = 10.0
inertia = [0.1, 0.2, 0.3]
standoff = 45.0
alpha_high_order = [0.3, 0.4]
sweep_agents = [2]
"#;
        let r = ConfigFile::parse(text).unwrap().apply(&ResolvedConfig::default());
        assert_eq!(r.episode.n_agents, 5);
        assert_eq!(r.episode.obs_mode, ObservationMode::OctDist);
        assert_eq!(r.controller.kind, ControllerKind::Random);
        assert_eq!(r.controller.seed, 11);
        assert_eq!(r.episode.constants.mass, 10.0);
        assert_eq!(r.episode.constants.inertia, Vec3::new(0.1, 0.2, 0.3));
        assert_eq!(r.controller.gains.standoff, 45.0);
        assert_eq!(r.episode.safety.alpha_high_order, [0.3, 0.4]);
        assert_eq!(r.sweep.agents, vec![2]);
        r.validate().unwrap();
    }

    fn field_of(text: &str) -> String {
        match ConfigFile::parse(text).and_then(|f| f.apply(&ResolvedConfig::default()).validate()) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of("agnets = 3"), "agnets");
        assert_eq!(field_of("mass = \"heavy\""), "mass");
        assert_eq!(field_of("obs_mode = \"lidar\""), "obs_mode");
        assert_eq!(field_of("agents = 9"), "agents");
        assert_eq!(field_of("mass = -1.0"), "mass");
        assert_eq!(field_of("position_kp = -0.1"), "position_kp");
        assert_eq!(field_of("sweep_agents = [0]"), "sweep_agents");
    }
}

//! Fixed-size observation vectors: the agent's own state and task
//! information, plus one of the scalable encodings of the other agents.
//!
//! Every vector is expressed in the observing agent's body frame.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DeputyState, SunState, Vec3};
use crate::inspection::{generate_points, nearest_uninspected_cluster, InspectionSphere};

pub const BASE_LEN: usize = 22;
pub const OCTANT_COUNT: usize = 8;
pub const REGION_COUNT: usize = 100;

const SENTINEL_NORM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationMode {
    Baseline,
    OctCount,
    OctDist,
    PointsCount,
    PointsDist,
}

impl ObservationMode {
    pub const ALL: [ObservationMode; 5] = [
        ObservationMode::Baseline,
        ObservationMode::OctCount,
        ObservationMode::OctDist,
        ObservationMode::PointsCount,
        ObservationMode::PointsDist,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ObservationMode::Baseline => "baseline",
            ObservationMode::OctCount => "oct-count",
            ObservationMode::OctDist => "oct-dist",
            ObservationMode::PointsCount => "points-count",
            ObservationMode::PointsDist => "points-dist",
        }
    }

    pub fn scalable_len(&self) -> usize {
        match self {
            ObservationMode::Baseline => 0,
            ObservationMode::OctCount | ObservationMode::OctDist => OCTANT_COUNT,
            ObservationMode::PointsCount | ObservationMode::PointsDist => REGION_COUNT,
        }
    }

    pub fn len(&self) -> usize {
        BASE_LEN + self.scalable_len()
    }

    fn counts(&self) -> bool {
        matches!(self, ObservationMode::OctCount | ObservationMode::PointsCount)
    }
}

impl fmt::Display for ObservationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObservationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObservationMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown observation mode `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationConfig {
    pub mode: ObservationMode,
    pub position_norm: f64,
    pub velocity_norm: f64,
    pub omega_norm: f64,
    /// Applied to the energy in kJ.
    pub energy_norm: f64,
    pub temperature_norm: f64,
    pub distance_norm: f64,
}

impl ObservationConfig {
    pub fn new(mode: ObservationMode) -> Self {
        ObservationConfig {
            mode,
            position_norm: 175.0,
            velocity_norm: 0.866,
            omega_norm: 0.05,
            energy_norm: 10.0,
            temperature_norm: 10.0,
            distance_norm: 800.0,
        }
    }
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self::new(ObservationMode::Baseline)
    }
}

fn magnitude_and_direction(v: &Vec3) -> (f64, Vec3) {
    let n = v.norm();
    if n < SENTINEL_NORM {
        (0.0, Vec3::zeros())
    } else {
        (n, v / n)
    }
}

/// Own-state and task block, `BASE_LEN` values:
/// `[|p|, p̂, |v|, v̂, ω, E, T, r̂_sun, r̂_priority, r̂_UPS]`.
pub fn encode_base(
    me: &DeputyState,
    sun: &SunState,
    sphere: &InspectionSphere,
    cluster_seed: u64,
    cfg: &ObservationConfig,
) -> Vec<f64> {
    let q = &me.att.q;
    let mut out = Vec::with_capacity(BASE_LEN);
    let (pn, pd) = magnitude_and_direction(&me.trans.p);
    out.push(pn / cfg.position_norm);
    out.extend(q.rotate_inverse(&pd).iter());
    let (vn, vd) = magnitude_and_direction(&me.trans.v);
    out.push(vn / cfg.velocity_norm);
    out.extend(q.rotate_inverse(&vd).iter());
    out.extend(me.att.omega.iter().map(|w| w / cfg.omega_norm));
    out.push(me.res.energy / 1000.0 / cfg.energy_norm);
    out.push(me.res.temperature / cfg.temperature_norm);
    out.extend(q.rotate_inverse(&sun.vector()).iter());
    out.extend(q.rotate_inverse(&sphere.priority).iter());
    let ups = nearest_uninspected_cluster(sphere, me, cluster_seed);
    out.extend(q.rotate_inverse(&ups).iter());
    debug_assert_eq!(out.len(), BASE_LEN);
    out
}

/// `(x≥0)·4 + (y≥0)·2 + (z≥0)`.
pub fn octant_index(rel: &Vec3) -> usize {
    (usize::from(rel.x >= 0.0) << 2) | (usize::from(rel.y >= 0.0) << 1) | usize::from(rel.z >= 0.0)
}

/// Unit directions of the 100 sphere regions.
pub fn region_directions() -> &'static [Vec3] {
    static DIRS: OnceLock<Vec<Vec3>> = OnceLock::new();
    DIRS.get_or_init(|| generate_points(REGION_COUNT, 1.0))
}

/// Region whose direction has the largest dot product with `rel`, lowest
/// index on ties.
pub fn sphere_region_index(rel: &Vec3, dirs: &[Vec3]) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, d) in dirs.iter().enumerate() {
        let s = rel.dot(d);
        if s > best.1 {
            best = (k, s);
        }
    }
    best.0
}

/// Scalable block for the agents in `others` as seen by `me`. Count modes
/// hold the number of agents per region, distance modes the normalized range
/// to the nearest one; empty regions are zero.
pub fn encode_scalable(me: &DeputyState, others: &[DeputyState], cfg: &ObservationConfig) -> Vec<f64> {
    let len = cfg.mode.scalable_len();
    let mut out = vec![0.0; len];
    if len == 0 {
        return out;
    }
    let octants = len == OCTANT_COUNT;
    for other in others {
        let rel_hill = other.trans.p - me.trans.p;
        let range = rel_hill.norm();
        let rel = me.att.q.rotate_inverse(&rel_hill);
        let k = if range == 0.0 {
            warn!("coincident agents; assigning region 0");
            0
        } else if octants {
            octant_index(&rel)
        } else {
            sphere_region_index(&rel, region_directions())
        };
        if cfg.mode.counts() {
            out[k] += 1.0;
        } else {
            let d = range / cfg.distance_norm;
            if out[k] == 0.0 || d < out[k] {
                out[k] = d;
            }
        }
    }
    out
}

/// Full observation: base block followed by the scalable block.
pub fn encode(
    me: &DeputyState,
    others: &[DeputyState],
    sun: &SunState,
    sphere: &InspectionSphere,
    cluster_seed: u64,
    cfg: &ObservationConfig,
) -> Vec<f64> {
    let mut obs = encode_base(me, sun, sphere, cluster_seed, cfg);
    obs.extend(encode_scalable(me, others, cfg));
    obs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{AttitudeState, Quat, ResourceState, TranslationalState};

    fn at(p: Vec3) -> DeputyState {
        DeputyState {
            trans: TranslationalState { p, v: Vec3::zeros() },
            att: AttitudeState::default(),
            res: ResourceState {
                energy: 5000.0,
                temperature: 5.0,
            },
        }
    }

    #[test]
    fn base_block_examples() {
        let sphere = InspectionSphere::with_priority(Vec3::x());
        let cfg = ObservationConfig::default();
        let obs = encode_base(&at(Vec3::new(175.0, 0.0, 0.0)), &SunState::new(0.0), &sphere, 0, &cfg);
        assert_eq!(obs.len(), BASE_LEN);
        assert_eq!(&obs[..4], &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(&obs[4..8], &[0.0; 4]);
        assert_eq!(obs[11], 0.5);
        assert_eq!(obs[12], 0.5);
    }

    #[test]
    fn octant_examples() {
        assert_eq!(octant_index(&Vec3::new(1.0, 1.0, 1.0)), 7);
        assert_eq!(octant_index(&Vec3::new(-1.0, -1.0, -1.0)), 0);
        assert_eq!(octant_index(&Vec3::new(0.0, 1.0, -1.0)), 6);
    }

    #[test]
    fn region_of_lattice_direction_is_itself() {
        let dirs = region_directions();
        for (k, d) in dirs.iter().enumerate() {
            assert_eq!(sphere_region_index(d, dirs), k);
            assert_ne!(sphere_region_index(&-d, dirs), k);
        }
    }

    #[test]
    fn scalable_examples() {
        let me = at(Vec3::zeros());
        let cfg = ObservationConfig::new(ObservationMode::OctCount);
        assert_eq!(encode_scalable(&me, &[], &cfg), vec![0.0; 8]);
        let one = encode_scalable(&me, &[at(Vec3::new(1.0, 1.0, 1.0))], &cfg);
        assert_eq!(one, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);

        let cfg = ObservationConfig::new(ObservationMode::OctDist);
        let two = encode_scalable(
            &me,
            &[at(Vec3::new(400.0, 0.0, 0.0)), at(Vec3::new(100.0, 0.0, 0.0))],
            &cfg,
        );
        assert_eq!(two[octant_index(&Vec3::x())], 0.125);
    }

    #[test]
    fn relative_positions_are_rotated_into_body() {
        let mut me = at(Vec3::zeros());
        me.att.q = Quat::from_axis_angle(&Vec3::z(), std::f64::consts::FRAC_PI_2);
        let cfg = ObservationConfig::new(ObservationMode::OctCount);
        // Hill +x is body -y
        let obs = encode_scalable(&me, &[at(Vec3::new(10.0, 0.0, 0.0))], &cfg);
        let negative_y: f64 = (0..8).filter(|k| k & 2 == 0).map(|k| obs[k]).sum();
        assert_eq!(negative_y, 1.0);
    }
}

//! Closed-form Clohessy-Wiltshire propagation for unforced relative motion.

use nalgebra::{Matrix3, Vector3};

use super::TranslationalState;

/// Position and velocity blocks of the CWH state-transition matrix at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub pp: Matrix3<f64>,
    pub pv: Matrix3<f64>,
    pub vp: Matrix3<f64>,
    pub vv: Matrix3<f64>,
}

impl Transition {
    pub fn at(t: f64, n: f64) -> Self {
        let (s, c) = (n * t).sin_cos();
        let nt = n * t;
        #[rustfmt::skip]
        let pp = Matrix3::new(
            4.0 - 3.0 * c,          0.0, 0.0,
            6.0 * (s - nt),         1.0, 0.0,
            0.0,                    0.0, c,
        );
        #[rustfmt::skip]
        let pv = Matrix3::new(
            s / n,                  2.0 * (1.0 - c) / n,        0.0,
            -2.0 * (1.0 - c) / n,   (4.0 * s - 3.0 * nt) / n,   0.0,
            0.0,                    0.0,                        s / n,
        );
        #[rustfmt::skip]
        let vp = Matrix3::new(
            3.0 * n * s,            0.0, 0.0,
            -6.0 * n * (1.0 - c),   0.0, 0.0,
            0.0,                    0.0, -n * s,
        );
        #[rustfmt::skip]
        let vv = Matrix3::new(
            c,          2.0 * s,        0.0,
            -2.0 * s,   4.0 * c - 3.0,  0.0,
            0.0,        0.0,            c,
        );
        Transition { pp, pv, vp, vv }
    }

    pub fn position(&self, s0: &TranslationalState) -> Vector3<f64> {
        self.pp * s0.p + self.pv * s0.v
    }

    pub fn apply(&self, s0: &TranslationalState) -> TranslationalState {
        TranslationalState {
            p: self.pp * s0.p + self.pv * s0.v,
            v: self.vp * s0.p + self.vv * s0.v,
        }
    }
}

/// Unforced CWH solution after `t` seconds.
pub fn cwh_closed_form(s0: &TranslationalState, t: f64, n: f64) -> TranslationalState {
    Transition::at(t, n).apply(s0)
}

/// Transition matrices tabulated on a uniform time grid `0, dt, ..., horizon`.
/// Used for the passive-safety checks, which evaluate many drift trajectories
/// on the same grid.
#[derive(Debug, Clone)]
pub struct DriftGrid {
    dt: f64,
    table: Vec<Transition>,
}

/// Closest approach to the chief found on a drift grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestApproach {
    pub index: usize,
    pub time: f64,
    pub distance: f64,
    pub position: Vector3<f64>,
}

impl DriftGrid {
    pub fn new(horizon: f64, dt: f64, n: f64) -> Self {
        let steps = (horizon / dt).round() as usize;
        let table = (0..=steps).map(|k| Transition::at(k as f64 * dt, n)).collect();
        DriftGrid { dt, table }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn transition(&self, index: usize) -> &Transition {
        &self.table[index]
    }

    /// Grid minimum of `|p(t)|`. Ties resolve to the earliest time.
    pub fn closest_approach(&self, s0: &TranslationalState) -> ClosestApproach {
        let mut best = ClosestApproach {
            index: 0,
            time: 0.0,
            distance: f64::INFINITY,
            position: s0.p,
        };
        for (k, tr) in self.table.iter().enumerate() {
            let p = tr.position(s0);
            let d = p.norm();
            if d < best.distance {
                best = ClosestApproach {
                    index: k,
                    time: k as f64 * self.dt,
                    distance: d,
                    position: p,
                };
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const N: f64 = 0.001027;

    #[test]
    fn zero_time_is_identity() {
        let s0 = TranslationalState {
            p: Vector3::new(12.0, -3.0, 7.0),
            v: Vector3::new(0.1, 0.2, -0.3),
        };
        let s = cwh_closed_form(&s0, 0.0, N);
        assert_relative_eq!(s.p, s0.p, epsilon = 1e-15);
        assert_relative_eq!(s.v, s0.v, epsilon = 1e-15);
    }

    #[test]
    fn cross_track_half_period_flips() {
        let s0 = TranslationalState {
            p: Vector3::new(0.0, 0.0, 40.0),
            v: Vector3::zeros(),
        };
        let s = cwh_closed_form(&s0, PI / N, N);
        assert_relative_eq!(s.p, Vector3::new(0.0, 0.0, -40.0), epsilon = 1e-9);
    }

    #[test]
    fn radial_offset_drifts_along_track_over_one_orbit() {
        let s0 = TranslationalState {
            p: Vector3::new(100.0, 0.0, 0.0),
            v: Vector3::zeros(),
        };
        let s = cwh_closed_form(&s0, 2.0 * PI / N, N);
        assert_relative_eq!(s.p, Vector3::new(100.0, -1200.0 * PI, 0.0), epsilon = 1e-8);
    }

    #[test]
    fn grid_minimum_prefers_earliest_tie() {
        let grid = DriftGrid::new(10.0, 1.0, N);
        assert_eq!(grid.len(), 11);
        let s0 = TranslationalState::default();
        let ca = grid.closest_approach(&s0);
        assert_eq!(ca.index, 0);
        assert_eq!(ca.distance, 0.0);
    }
}

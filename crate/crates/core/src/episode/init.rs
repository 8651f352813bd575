//! Random initial conditions.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::constraints::{h_deputy_pair, psi, value, ConstraintContext, ConstraintId, SafetyModel};
use crate::dynamics::{AttitudeState, DeputyState, Quat, ResourceState, SunState, TranslationalState, Vec3};
use crate::error::{Error, Result};

pub const MAX_RESAMPLE_ATTEMPTS: usize = 1000;

/// Point at radius `r`, azimuth `a` and elevation `e`.
pub fn spherical(r: f64, a: f64, e: f64) -> Vec3 {
    Vec3::new(r * a.cos() * e.cos(), r * a.sin() * e.cos(), r * e.sin())
}

fn random_direction_angles(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.gen_range(0.0..=TAU), rng.gen_range(-FRAC_PI_2..=FRAC_PI_2))
}

/// Uniform rotation via Shoemake's subgroup algorithm.
pub fn random_quaternion(rng: &mut ChaCha8Rng) -> Quat {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let u3: f64 = rng.gen();
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    Quat::new(
        a * (TAU * u2).sin(),
        a * (TAU * u2).cos(),
        b * (TAU * u3).sin(),
        b * (TAU * u3).cos(),
    )
    .normalized()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConditions {
    pub deputies: Vec<DeputyState>,
    pub sun: SunState,
    pub priority: Vec3,
}

fn sample_position(rng: &mut ChaCha8Rng) -> Vec3 {
    let r = rng.gen_range(50.0..=100.0);
    let (a, e) = random_direction_angles(rng);
    spherical(r, a, e)
}

fn at_rest(p: Vec3) -> DeputyState {
    DeputyState {
        trans: TranslationalState { p, v: Vec3::zeros() },
        ..Default::default()
    }
}

/// Resamples, in agent order, every position whose pairwise collision
/// constraint with an earlier agent is negative.
pub fn resolve_positions(positions: &mut [Vec3], rng: &mut ChaCha8Rng, model: &SafetyModel) -> Result<()> {
    for i in 0..positions.len() {
        let mut attempts = 0;
        // coincident agents give NaN, which counts as violated
        while (0..i).any(|j| !(h_deputy_pair(model, &at_rest(positions[i]), &at_rest(positions[j])) >= 0.0)) {
            attempts += 1;
            if attempts > MAX_RESAMPLE_ATTEMPTS {
                return Err(Error::InitializationFailure { attempts });
            }
            positions[i] = sample_position(rng);
        }
    }
    Ok(())
}

/// Attitude constraints and their first high-order stage hold at `s`.
pub fn attitude_admissible(s: &DeputyState, sun: SunState, model: &SafetyModel) -> bool {
    let ctx = ConstraintContext::new(model, s, &[], sun);
    [ConstraintId::Ez, ConstraintId::Temp, ConstraintId::Batt]
        .iter()
        .all(|&id| {
            let spec = model.spec(id);
            value(id, &ctx) >= 0.0 && matches!(psi(&spec, &ctx, 1), Ok(p) if p >= 0.0)
        })
}

pub fn initialize(n_agents: usize, rng: &mut ChaCha8Rng, model: &SafetyModel) -> Result<InitialConditions> {
    let sun = SunState::new(rng.gen_range(0.0..=TAU));
    let (a, e) = random_direction_angles(rng);
    let priority = spherical(1.0, a, e);

    let mut positions: Vec<Vec3> = (0..n_agents).map(|_| sample_position(rng)).collect();
    resolve_positions(&mut positions, rng, model)?;

    let mut deputies = Vec::with_capacity(n_agents);
    for p in positions {
        let res = ResourceState {
            energy: rng.gen_range(5000.0..=7000.0),
            temperature: rng.gen_range(3.0..=7.0),
        };
        let mut s = DeputyState {
            trans: TranslationalState { p, v: Vec3::zeros() },
            att: AttitudeState {
                q: random_quaternion(rng),
                omega: Vec3::zeros(),
            },
            res,
        };
        let mut attempts = 0;
        while !attitude_admissible(&s, sun, model) {
            attempts += 1;
            if attempts > MAX_RESAMPLE_ATTEMPTS {
                return Err(Error::InitializationFailure { attempts });
            }
            s.att.q = random_quaternion(rng);
        }
        deputies.push(s);
    }
    Ok(InitialConditions {
        deputies,
        sun,
        priority,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::SafetyParams;
    use crate::dynamics::PhysicalConstants;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    #[test]
    fn spherical_examples() {
        assert_eq!(spherical(50.0, 0.0, 0.0), Vec3::new(50.0, 0.0, 0.0));
        let p = spherical(100.0, FRAC_PI_2, FRAC_PI_2);
        assert_relative_eq!(p, Vec3::new(0.0, 0.0, 100.0), epsilon = 1e-12);
    }

    #[test]
    fn coincident_agents_are_separated() {
        let model = SafetyModel::new(SafetyParams::default(), PhysicalConstants::default());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ps = vec![Vec3::new(60.0, 0.0, 0.0); 3];
        resolve_positions(&mut ps, &mut rng, &model).unwrap();
        for i in 0..3 {
            for j in 0..i {
                assert!(h_deputy_pair(&model, &at_rest(ps[i]), &at_rest(ps[j])) >= 0.0);
            }
        }
    }

    #[test]
    fn initial_states_are_admissible() {
        let model = SafetyModel::new(SafetyParams::default(), PhysicalConstants::default());
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ic = initialize(5, &mut rng, &model).unwrap();
            for s in &ic.deputies {
                let r = s.trans.p.norm();
                assert!((50.0..=100.0 + 1e-9).contains(&r));
                assert!((s.att.q.norm() - 1.0).abs() < 1e-12);
                assert!(attitude_admissible(s, ic.sun, &model));
                assert!((5000.0..=7000.0).contains(&s.res.energy));
            }
        }
    }
}

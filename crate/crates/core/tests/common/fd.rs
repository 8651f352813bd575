//! Central finite differences along the integrated flow, for checking the
//! analytic Lie derivatives.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use inspect_rta::constraints::{lie_derivatives, psi, ConstraintContext, ConstraintId, SafetyModel};
use inspect_rta::dynamics::{
    step, AttitudeState, ControlInput, DeputyState, PhysicalConstants, Quat, ResourceState, SunState,
    TranslationalState,
};

use super::random_unit;

pub const DELTA: f64 = 1e-3;

pub fn fd_state(rng: &mut ChaCha8Rng) -> DeputyState {
    let p = random_unit(rng) * rng.gen_range(40.0..300.0);
    let v = random_unit(rng) * rng.gen_range(0.05..0.5);
    let q = Quat::from_axis_angle(&random_unit(rng), rng.gen_range(0.0..std::f64::consts::PI));
    let omega = random_unit(rng) * rng.gen_range(0.1f64..1.5).to_radians();
    DeputyState {
        trans: TranslationalState { p, v },
        att: AttitudeState { q, omega },
        res: ResourceState {
            energy: rng.gen_range(2000.0..8000.0),
            temperature: rng.gen_range(-20.0..8.0),
        },
    }
}

pub fn random_control(rng: &mut ChaCha8Rng, c: &PhysicalConstants) -> ControlInput {
    let mut u = [0.0; 6];
    for (k, x) in u.iter_mut().enumerate() {
        let lim = if k < 3 { c.thrust_max } else { c.torque_max };
        *x = rng.gen_range(-lim..lim);
    }
    ControlInput::from_array(u)
}

pub struct Scene {
    pub me: DeputyState,
    pub others: Vec<(usize, DeputyState)>,
    pub sun: SunState,
}

impl Scene {
    pub fn random(rng: &mut ChaCha8Rng) -> Scene {
        Scene {
            me: fd_state(rng),
            others: vec![(1, fd_state(rng)), (4, fd_state(rng))],
            sun: SunState::new(rng.gen_range(0.0..std::f64::consts::TAU)),
        }
    }

    /// Everyone drifts except `me`, who holds `u`.
    pub fn advance(&self, u: &ControlInput, dt: f64, c: &PhysicalConstants) -> Scene {
        Scene {
            me: step(&self.me, u, &self.sun, dt, c).unwrap(),
            others: self
                .others
                .iter()
                .map(|(j, s)| (*j, step(s, &ControlInput::ZERO, &self.sun, dt, c).unwrap()))
                .collect(),
            sun: self.sun.advance(dt, c),
        }
    }
}

pub struct Comparison {
    pub id: ConstraintId,
    pub analytic: f64,
    pub numeric: f64,
    pub error: f64,
}

fn relative_error(analytic: f64, numeric: f64, scale: f64) -> f64 {
    // floor accounts for cancellation in the difference quotient
    let floor = f64::EPSILON * scale / DELTA * 1e4;
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Analytic against numeric rate of the highest `Ψ` of every constraint at
/// `scene` under `u`. Rows with a singular gradient and PSM rows whose grid
/// minimum jumps inside the stencil are left out.
pub fn compare(model: &SafetyModel, scene: &Scene, u: &ControlInput) -> Vec<Comparison> {
    let c = &model.constants;
    let ctx = ConstraintContext::new(model, &scene.me, &scene.others, scene.sun);
    let stencil: Vec<Scene> = [DELTA, -DELTA, 0.5 * DELTA, -0.5 * DELTA]
        .iter()
        .map(|dt| scene.advance(u, *dt, c))
        .collect();
    let ctxs: Vec<ConstraintContext> = stencil
        .iter()
        .map(|s| ConstraintContext::new(model, &s.me, &s.others, s.sun))
        .collect();
    let mut out = Vec::new();
    for spec in model.specs(&scene.others) {
        let degree = spec.relative_degree;
        let Ok(d) = lie_derivatives(&spec, &ctx, degree) else {
            continue;
        };
        let j = degree - 1;
        let Ok(h0) = psi(&spec, &ctx, j) else {
            continue;
        };
        let Ok(h) = ctxs.iter().map(|x| psi(&spec, x, j)).collect::<Result<Vec<_>, _>>() else {
            continue;
        };
        if spec.id == ConstraintId::Psm {
            let g = model.psm_grid();
            let idx = |s: &Scene| g.closest_approach(&s.me.trans).index;
            if stencil.iter().any(|s| idx(s) != idx(&stencil[0])) {
                continue;
            }
        }
        // Richardson extrapolation of two central differences
        let wide = (h[0] - h[1]) / (2.0 * DELTA);
        let narrow = (h[2] - h[3]) / DELTA;
        let numeric = (4.0 * narrow - wide) / 3.0;
        let analytic = d.rate(&u.to_array());
        out.push(Comparison {
            id: spec.id,
            analytic,
            numeric,
            error: relative_error(analytic, numeric, h0.abs().max(1.0)),
        });
    }
    out
}

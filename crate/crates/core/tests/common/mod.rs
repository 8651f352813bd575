//! Independent oracles and scene generators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use inspect_rta::constraints::{hocbf_compose, ConstraintContext, SafetyModel};
use inspect_rta::dynamics::{
    AttitudeState, DeputyState, PhysicalConstants, Quat, ResourceState, SunState, TranslationalState, Vec3,
};
use inspect_rta::inspection::InspectionSphere;
use inspect_rta::observation::ObservationMode;
use inspect_rta::qp::QuadraticProgram;

pub mod fd;

pub fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n < 1.0 {
            return v / n;
        }
    }
}

pub fn random_quat(rng: &mut ChaCha8Rng) -> Quat {
    Quat::from_axis_angle(&random_unit(rng), rng.gen_range(0.0..2.0 * PI))
}

pub fn random_state(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> DeputyState {
    DeputyState {
        trans: TranslationalState {
            p: random_unit(rng) * rng.gen_range(r_min..r_max),
            v: random_unit(rng) * rng.gen_range(0.0..0.3),
        },
        att: AttitudeState {
            q: random_quat(rng),
            omega: random_unit(rng) * rng.gen_range(0.0f64..1.0).to_radians(),
        },
        res: ResourceState {
            energy: rng.gen_range(3000.0..8000.0),
            temperature: rng.gen_range(-10.0..6.0),
        },
    }
}

/// Body-to-Hill matrix of a scalar-last Hamilton quaternion, written out
/// element by element.
pub fn rotation(q: &Quat) -> Matrix3<f64> {
    let [x, y, z, w] = q.0;
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - z * w),
        2.0 * (x * z + y * w),
        2.0 * (x * y + z * w),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - x * w),
        2.0 * (x * z - y * w),
        2.0 * (y * z + x * w),
        1.0 - 2.0 * (x * x + y * y),
    )
}

pub fn sun_direction(sun: &SunState) -> Vec3 {
    Vec3::new(sun.theta.cos(), sun.theta.sin(), 0.0)
}

/// Fibonacci lattice directions, generated here rather than taken from the
/// crate.
pub fn lattice(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

pub fn octant_oracle(rel_body: &Vec3) -> usize {
    let mut k = 0;
    if rel_body.x >= 0.0 {
        k += 4;
    }
    if rel_body.y >= 0.0 {
        k += 2;
    }
    if rel_body.z >= 0.0 {
        k += 1;
    }
    k
}

/// Region with the smallest angle to `rel_body`, first on ties.
pub fn region_oracle(rel_body: &Vec3, dirs: &[Vec3]) -> usize {
    let u = rel_body.normalize();
    let mut best = 0;
    let mut best_angle = f64::INFINITY;
    for (k, d) in dirs.iter().enumerate() {
        let a = u.dot(d).clamp(-1.0, 1.0).acos();
        if a < best_angle {
            best = k;
            best_angle = a;
        }
    }
    best
}

/// Whether `point` on the chief is lit and seen by `deputy` with a sensor of
/// full cone angle `fov` along body x.
pub fn inspected_by(point: &Vec3, deputy: &DeputyState, sun: &SunState, fov: f64) -> bool {
    let lit = point.dot(&sun_direction(sun)) > 0.0;
    let boresight = rotation(&deputy.att.q) * Vec3::x();
    let los = point - deputy.trans.p;
    let off = (boresight.dot(&los) / (boresight.norm() * los.norm()))
        .clamp(-1.0, 1.0)
        .acos();
    let facing = point.dot(&(deputy.trans.p - point)) > 0.0;
    lit && facing && off <= 0.5 * fov
}

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in
/// sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Filter-shaped QP: least distance to `u_des` over six box-bounded
/// channels, with one slack variable per soft row.
#[derive(Debug, Clone)]
pub struct AsifQp {
    pub weights: Vec<f64>,
    pub target: Vec<f64>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl AsifQp {
    pub fn new(u_des: [f64; 6], limits: [f64; 6], rows: &[([f64; 6], f64, Option<f64>)]) -> Self {
        let n_slack = rows.iter().filter(|r| r.2.is_some()).count();
        let n = 6 + n_slack;
        let mut weights = vec![1.0; 6];
        let mut target = u_des.to_vec();
        let mut g = Vec::new();
        let mut rhs = Vec::new();
        let mut next = 6;
        for (lg, b, slack) in rows {
            let mut row = lg.to_vec();
            row.resize(n, 0.0);
            if let Some(w) = slack {
                weights.push(*w);
                target.push(0.0);
                row[next] = -1.0;
                next += 1;
            }
            g.push(row);
            rhs.push(*b);
        }
        AsifQp {
            weights,
            target,
            lb: limits.iter().map(|l| -l).collect(),
            ub: limits.to_vec(),
            rows: g,
            rhs,
        }
    }

    pub fn to_qp(&self) -> QuadraticProgram {
        let mut qp = QuadraticProgram::least_squares(&self.weights, &self.target);
        qp.lb = self.lb.clone();
        qp.ub = self.ub.clone();
        for (r, b) in self.rows.iter().zip(&self.rhs) {
            qp.add_row(r.clone(), *b);
        }
        qp
    }

    /// `Σ wᵢ (zᵢ − tᵢ)²`.
    pub fn cost(&self, z: &[f64]) -> f64 {
        z.iter()
            .zip(&self.weights)
            .zip(&self.target)
            .map(|((z, w), t)| w * (z - t) * (z - t))
            .sum()
    }

    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, b) in self.rows.iter().zip(&self.rhs) {
            let lhs: f64 = r.iter().zip(z).map(|(a, x)| a * x).sum();
            let scale = 1.0 + b.abs() + r.iter().zip(z).map(|(a, x)| (a * x).abs()).sum::<f64>();
            worst = worst.max((b - lhs) / scale);
        }
        for k in 0..self.lb.len() {
            worst = worst.max(self.lb[k] - z[k]).max(z[k] - self.ub[k]);
        }
        worst
    }

    /// Exhaustive active-set enumeration. Every choice of bound status per
    /// channel and subset of rows held with equality gives an equality
    /// constrained minimizer; the cheapest feasible one is the optimum.
    /// `None` when no candidate is feasible.
    pub fn enumerate(&self) -> Option<(Vec<f64>, f64)> {
        let n = self.weights.len();
        let m = self.rows.len();
        let mut best: Option<(Vec<f64>, f64)> = None;
        for code in 0..3usize.pow(6) {
            let mut fixed = vec![None; n];
            let mut c = code;
            for (k, f) in fixed.iter_mut().enumerate().take(6) {
                *f = match c % 3 {
                    0 => None,
                    1 => Some(self.lb[k]),
                    _ => Some(self.ub[k]),
                };
                c /= 3;
            }
            for mask in 0..(1usize << m) {
                let active: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
                let Some(z) = self.equality_minimizer(&fixed, &active) else {
                    continue;
                };
                if self.max_violation(&z) > 1e-10 {
                    continue;
                }
                let f = self.cost(&z);
                if best.as_ref().is_none_or(|(_, b)| f < *b) {
                    best = Some((z, f));
                }
            }
        }
        best
    }

    fn equality_minimizer(&self, fixed: &[Option<f64>], active: &[usize]) -> Option<Vec<f64>> {
        let n = self.weights.len();
        let free: Vec<usize> = (0..n).filter(|k| fixed[*k].is_none()).collect();
        let mut z: Vec<f64> = (0..n).map(|k| fixed[k].unwrap_or(self.target[k])).collect();
        if active.is_empty() {
            return Some(z);
        }
        if active.len() > free.len() {
            return None;
        }
        // in x = √w·z the problem is the projection of √w·t onto B x = b'
        // with B = A W^{-1/2}; QR of Bᵀ keeps it well conditioned
        let k = active.len();
        let sw: Vec<f64> = free.iter().map(|&j| self.weights[j].sqrt()).collect();
        let bt = DMatrix::from_fn(free.len(), k, |j, i| self.rows[active[i]][free[j]] / sw[j]);
        let rhs = DVector::from_fn(k, |i, _| {
            let r = &self.rows[active[i]];
            let fixed_part: f64 = (0..n).filter_map(|j| fixed[j].map(|v| r[j] * v)).sum();
            self.rhs[active[i]] - fixed_part
        });
        let xt = DVector::from_fn(free.len(), |j, _| self.target[free[j]] * sw[j]);
        let qr = bt.clone().qr();
        let r = qr.r();
        if (0..k).any(|i| r[(i, i)].abs() < 1e-14 * bt.column(i).norm().max(1e-300)) {
            return None;
        }
        let gap = rhs - bt.transpose() * &xt;
        let w = r.transpose().solve_lower_triangular(&gap)?;
        let x = xt + qr.q() * w;
        for (j, &idx) in free.iter().enumerate() {
            z[idx] = x[j] / sw[j];
        }
        Some(z)
    }
}

/// A random QP shaped like the filter's: either synthetic rows around a
/// feasible point or up to three rows taken from the real constraint set.
pub fn random_asif_qp(rng: &mut ChaCha8Rng, model: &SafetyModel) -> AsifQp {
    let c: &PhysicalConstants = &model.constants;
    let limits = [
        c.thrust_max,
        c.thrust_max,
        c.thrust_max,
        c.torque_max,
        c.torque_max,
        c.torque_max,
    ];
    let mut u_des = [0.0; 6];
    for (u, l) in u_des.iter_mut().zip(&limits) {
        *u = rng.gen_range(-1.5 * l..1.5 * l);
    }
    let slack_weight = [1e2, 1e6, 1e12][rng.gen_range(0..3)];
    let mut rows = Vec::new();
    if rng.gen_bool(0.5) {
        let mut u0 = [0.0; 6];
        for (u, l) in u0.iter_mut().zip(&limits) {
            *u = rng.gen_range(-0.8 * l..0.8 * l);
        }
        for _ in 0..rng.gen_range(1..=3) {
            let mut lg = [0.0; 6];
            for (k, g) in lg.iter_mut().enumerate() {
                *g = rng.gen_range(-1.0..1.0) / limits[k];
            }
            let at_u0: f64 = lg.iter().zip(&u0).map(|(g, u)| g * u).sum();
            let soft = rng.gen_bool(0.4);
            let b = if soft {
                at_u0 + rng.gen_range(-1.0..3.0)
            } else {
                at_u0 - rng.gen_range(0.0..0.5)
            };
            rows.push((lg, b, soft.then_some(slack_weight)));
        }
    } else {
        let me = random_state(rng, 16.0, 200.0);
        let others: Vec<_> = (0..2).map(|j| (j + 1, random_state(rng, 16.0, 200.0))).collect();
        let sun = SunState::new(rng.gen_range(0.0..2.0 * PI));
        let ctx = ConstraintContext::new(model, &me, &others, sun);
        let specs = model.specs(&others);
        for _ in 0..rng.gen_range(1..=3) {
            let spec = specs[rng.gen_range(0..specs.len())];
            let Ok(row) = hocbf_compose(&spec, &ctx) else {
                continue;
            };
            let b = -(row.lf + row.alpha_term) + rng.gen_range(0.0..0.5);
            rows.push((row.lg, b, spec.slackable.then_some(slack_weight)));
        }
    }
    AsifQp::new(u_des, limits, &rows)
}

/// Scalable observation block of `me` computed from the oracles above.
pub fn expected_block(me: &DeputyState, others: &[DeputyState], mode: ObservationMode) -> Vec<f64> {
    let (len, octants, counts) = match mode {
        ObservationMode::Baseline => return Vec::new(),
        ObservationMode::OctCount => (8, true, true),
        ObservationMode::OctDist => (8, true, false),
        ObservationMode::PointsCount => (100, false, true),
        ObservationMode::PointsDist => (100, false, false),
    };
    let dirs = lattice(100);
    let r = rotation(&me.att.q);
    let mut out = vec![0.0; len];
    let mut nearest = vec![f64::INFINITY; len];
    for o in others {
        let rel = o.trans.p - me.trans.p;
        let body = r.transpose() * rel;
        let k = if octants {
            octant_oracle(&body)
        } else {
            region_oracle(&body, &dirs)
        };
        if counts {
            out[k] += 1.0;
        } else {
            nearest[k] = nearest[k].min(rel.norm());
        }
    }
    if !counts {
        for (o, n) in out.iter_mut().zip(&nearest) {
            if n.is_finite() {
                *o = n / 800.0;
            }
        }
    }
    out
}

/// Deputy somewhere around the chief, usually looking roughly at it.
pub fn viewer(rng: &mut ChaCha8Rng) -> DeputyState {
    let p = random_unit(rng) * rng.gen_range(11.0..120.0);
    let q = if rng.gen_bool(0.7) {
        let target = (-p.normalize() + random_unit(rng) * rng.gen_range(0.0..0.3)).normalize();
        let axis = Vec3::x().cross(&target);
        Quat::from_axis_angle(&axis, axis.norm().atan2(Vec3::x().dot(&target)))
    } else {
        random_quat(rng)
    };
    DeputyState {
        trans: TranslationalState { p, v: Vec3::zeros() },
        att: AttitudeState {
            q,
            omega: Vec3::zeros(),
        },
        ..Default::default()
    }
}

pub fn inspection_scene(rng: &mut ChaCha8Rng) -> (InspectionSphere, Vec<DeputyState>, SunState) {
    let mut sphere = InspectionSphere::with_priority(random_unit(rng));
    for flag in sphere.inspected.iter_mut() {
        *flag = rng.gen_bool(0.2);
    }
    let deputies = (0..rng.gen_range(1..=5)).map(|_| viewer(rng)).collect();
    (
        sphere,
        deputies,
        SunState::new(rng.gen_range(0.0..std::f64::consts::TAU)),
    )
}

//! Small dense strictly convex QP with a diagonal Hessian:
//!
//! ```text
//! minimize   ½ zᵀ H z + cᵀ z
//! subject to G z ≥ h,   lb ≤ z[..n_box] ≤ ub
//! ```
//!
//! Solved with a dual active-set method (Goldfarb–Idnani) on the scaled
//! variable `y = H^{1/2} z`, which turns the problem into a least-distance
//! projection. Pivots are chosen deterministically: most violated constraint
//! by normalized violation, ties to the lowest index.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const FEASIBILITY_TOL: f64 = 1e-8;
pub const DEGENERATE_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProgram {
    /// Diagonal of `H`, all entries > 0.
    pub h_diag: Vec<f64>,
    pub c: Vec<f64>,
    /// Rows of `G`.
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    /// Bounds on the first `lb.len()` variables.
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub z: Vec<f64>,
    pub status: QpStatus,
    /// Largest of the relative stationarity, primal and complementarity
    /// residuals. For an infeasible program this is the violation of the
    /// blocking row.
    pub kkt_residual: f64,
    /// Multipliers of the rows of `G`.
    pub multipliers: Vec<f64>,
    /// Multipliers of the lower and upper bounds.
    pub bound_multipliers: (Vec<f64>, Vec<f64>),
    pub iterations: usize,
}

impl QuadraticProgram {
    /// `min ‖z − target‖²` weighted by `weights`, i.e. `H = 2·diag(w)`,
    /// `c = −2·w∘target`.
    pub fn least_squares(weights: &[f64], target: &[f64]) -> Self {
        QuadraticProgram {
            h_diag: weights.iter().map(|w| 2.0 * w).collect(),
            c: weights.iter().zip(target).map(|(w, t)| -2.0 * w * t).collect(),
            g: Vec::new(),
            h: Vec::new(),
            lb: Vec::new(),
            ub: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.h_diag.len()
    }

    pub fn add_row(&mut self, row: Vec<f64>, rhs: f64) {
        self.g.push(row);
        self.h.push(rhs);
    }

    pub fn objective(&self, z: &[f64]) -> f64 {
        z.iter()
            .zip(&self.h_diag)
            .zip(&self.c)
            .map(|((z, h), c)| 0.5 * h * z * z + c * z)
            .sum()
    }

    fn validate(&self) {
        let n = self.dim();
        assert!(self.h_diag.iter().all(|&h| h > 0.0), "H must be positive definite");
        assert_eq!(self.c.len(), n);
        assert_eq!(self.g.len(), self.h.len());
        assert!(self.g.iter().all(|r| r.len() == n));
        assert_eq!(self.lb.len(), self.ub.len());
        assert!(self.lb.len() <= n);
        assert!(self.lb.iter().zip(&self.ub).all(|(l, u)| l < u), "degenerate box");
    }

    pub fn solve(&self) -> QpSolution {
        solve(self)
    }
}

/// Constraints `aᵀy ≥ b` in scaled coordinates; general rows first, then
/// lower bounds, then upper bounds.
struct Scaled {
    a: Vec<DVector<f64>>,
    b: Vec<f64>,
    norm: Vec<f64>,
}

fn scale(qp: &QuadraticProgram, d_inv: &DVector<f64>) -> Scaled {
    let n = qp.dim();
    let mut a = Vec::with_capacity(qp.g.len() + 2 * qp.lb.len());
    let mut b = Vec::with_capacity(a.capacity());
    for (row, rhs) in qp.g.iter().zip(&qp.h) {
        a.push(DVector::from_iterator(
            n,
            row.iter().zip(d_inv.iter()).map(|(g, d)| g * d),
        ));
        b.push(*rhs);
    }
    for (k, lb) in qp.lb.iter().enumerate() {
        let mut e = DVector::zeros(n);
        e[k] = d_inv[k];
        a.push(e);
        b.push(*lb);
    }
    for (k, ub) in qp.ub.iter().enumerate() {
        let mut e = DVector::zeros(n);
        e[k] = -d_inv[k];
        a.push(e);
        b.push(-ub);
    }
    let norm = a.iter().map(|v| v.norm()).collect();
    Scaled { a, b, norm }
}

/// Primal step `z = (I − N N⁺) a` and dual step `r = N⁺ a` for the active
/// normals `N`.
fn directions(sc: &Scaled, active: &[usize], ap: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let k = active.len();
    if k == 0 {
        return (ap.clone(), DVector::zeros(0));
    }
    let n = ap.len();
    let nmat = DMatrix::from_fn(n, k, |i, j| sc.a[active[j]][i]);
    let qr = nmat.qr();
    let q = qr.q();
    let qta = q.transpose() * ap;
    let r = qr.r().solve_upper_triangular(&qta).unwrap_or_else(|| DVector::zeros(k));
    let z = ap - &q * &qta;
    (z, r)
}

pub fn solve(qp: &QuadraticProgram) -> QpSolution {
    qp.validate();
    let n = qp.dim();
    let d: DVector<f64> = DVector::from_iterator(n, qp.h_diag.iter().map(|h| h.sqrt()));
    let d_inv = d.map(|x| 1.0 / x);
    let sc = scale(qp, &d_inv);
    let m = sc.a.len();

    // unconstrained minimizer
    let y0 = DVector::from_iterator(n, qp.c.iter().zip(d_inv.iter()).map(|(c, di)| -c * di));
    let mut y = y0.clone();
    let mut active: Vec<usize> = Vec::new();
    let mut lambda: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let mut status = QpStatus::Optimal;
    let mut certificate = 0.0;

    'outer: loop {
        // most violated row, normalized
        let mut pick: Option<(usize, f64)> = None;
        for i in 0..m {
            if active.contains(&i) || sc.norm[i] == 0.0 {
                continue;
            }
            let viol = (sc.a[i].dot(&y) - sc.b[i]) / sc.norm[i];
            if viol < -FEASIBILITY_TOL && pick.is_none_or(|(_, v)| viol < v) {
                pick = Some((i, viol));
            }
        }
        let Some((p, _)) = pick else {
            break;
        };
        let mut lambda_p = 0.0;
        loop {
            iterations += 1;
            if iterations > MAX_ITERATIONS {
                status = QpStatus::MaxIterations;
                break 'outer;
            }
            let ap = &sc.a[p];
            let slack = ap.dot(&y) - sc.b[p];
            let (z, r) = directions(&sc, &active, ap);
            // dual blocking step
            let mut t1 = f64::INFINITY;
            let mut block = None;
            for (j, &rj) in r.iter().enumerate() {
                if rj > DEGENERATE_TOL {
                    let t = lambda[j] / rj;
                    if t < t1 {
                        t1 = t;
                        block = Some(j);
                    }
                }
            }
            // equals zᵀa_p, without the cancellation
            let zz = z.dot(&z);
            let t2 = if z.norm() > DEGENERATE_TOL * sc.norm[p] && zz > 0.0 {
                -slack / zz
            } else {
                f64::INFINITY
            };
            if t1.is_infinite() && t2.is_infinite() {
                status = QpStatus::Infeasible;
                certificate = -slack / sc.norm[p];
                break 'outer;
            }
            let t = t1.min(t2);
            if t2.is_finite() {
                y += &z * t;
            }
            for (l, rj) in lambda.iter_mut().zip(r.iter()) {
                *l -= t * rj;
            }
            lambda_p += t;
            if t2 <= t1 {
                active.push(p);
                lambda.push(lambda_p);
                reproject(&sc, &active, &mut y);
                break;
            }
            let j = block.expect("finite dual step has a blocking row");
            active.remove(j);
            lambda.remove(j);
        }
    }

    if status == QpStatus::Optimal && !active.is_empty() {
        if let Some((yp, lp)) = polish(&sc, &active, &y0) {
            y = yp;
            lambda = lp;
        }
    }
    let mut mult = vec![0.0; m];
    for (i, l) in active.iter().zip(&lambda) {
        mult[*i] = l.max(0.0);
    }
    let ng = qp.g.len();
    let nb = qp.lb.len();
    let mut zsol: Vec<f64> = if active.is_empty() {
        qp.c.iter().zip(&qp.h_diag).map(|(c, h)| -c / h).collect()
    } else {
        y.iter().zip(d_inv.iter()).map(|(y, di)| y * di).collect()
    };
    // undo the rounding of the scaling on the box
    for (k, (lb, ub)) in qp.lb.iter().zip(&qp.ub).enumerate() {
        if active.contains(&(ng + k)) {
            zsol[k] = *lb;
        } else if active.contains(&(ng + nb + k)) {
            zsol[k] = *ub;
        }
        zsol[k] = zsol[k].clamp(*lb, *ub);
    }
    let kkt = match status {
        QpStatus::Infeasible => certificate,
        _ => kkt_residual(&sc, &y, &y0, &mult),
    };
    QpSolution {
        z: zsol,
        status,
        kkt_residual: kkt,
        multipliers: mult[..ng].to_vec(),
        bound_multipliers: (mult[ng..ng + nb].to_vec(), mult[ng + nb..].to_vec()),
        iterations,
    }
}

/// Moves `y` back onto the active rows by the smallest correction. Long
/// steps along nearly parallel normals otherwise leave it visibly off them.
fn reproject(sc: &Scaled, active: &[usize], y: &mut DVector<f64>) {
    let n = y.len();
    let k = active.len();
    let nmat = DMatrix::from_fn(n, k, |i, j| sc.a[active[j]][i]);
    let qr = nmat.qr();
    let gap = DVector::from_iterator(k, active.iter().map(|&i| sc.b[i] - sc.a[i].dot(y)));
    if let Some(w) = qr.r().transpose().solve_lower_triangular(&gap) {
        if w.iter().all(|x| x.is_finite()) {
            *y += qr.q() * w;
        }
    }
}

/// Closed-form projection of `y0` onto the active rows taken as equalities.
/// Returns `None` when the result is not primal and dual feasible, in which
/// case the iterate is kept.
fn polish(sc: &Scaled, active: &[usize], y0: &DVector<f64>) -> Option<(DVector<f64>, Vec<f64>)> {
    let n = y0.len();
    let k = active.len();
    let nmat = DMatrix::from_fn(n, k, |i, j| sc.a[active[j]][i]);
    let qr = nmat.qr();
    let q = qr.q();
    let r = qr.r();
    let b = DVector::from_iterator(k, active.iter().map(|&i| sc.b[i]));
    let w = r.transpose().solve_lower_triangular(&b)? - q.transpose() * y0;
    let lambda = r.solve_upper_triangular(&w)?;
    let y = y0 + &q * &w;
    if !y.iter().chain(lambda.iter()).all(|x| x.is_finite()) || lambda.iter().any(|&l| l < 0.0) {
        return None;
    }
    let feasible =
        (0..sc.a.len()).all(|i| sc.norm[i] == 0.0 || (sc.a[i].dot(&y) - sc.b[i]) / sc.norm[i] >= -FEASIBILITY_TOL);
    feasible.then(|| (y, lambda.iter().copied().collect()))
}

/// Stationarity and complementarity relative to the size of the terms they
/// balance, primal violation as a distance in the scaled space.
fn kkt_residual(sc: &Scaled, y: &DVector<f64>, y0: &DVector<f64>, mult: &[f64]) -> f64 {
    let mut grad = y - y0;
    let mut scale = 1f64.max(y0.amax()).max(grad.amax());
    let mut worst: f64 = 0.0;
    let mut complementarity: f64 = 0.0;
    for (i, &l) in mult.iter().enumerate() {
        let s = (sc.a[i].dot(y) - sc.b[i]) / sc.norm[i].max(f64::MIN_POSITIVE);
        worst = worst.max(-s);
        if l > 0.0 {
            grad -= &sc.a[i] * l;
            scale = scale.max(l * sc.norm[i]);
            complementarity = complementarity.max((l * sc.norm[i] * s).abs());
        }
    }
    worst.max(grad.amax() / scale).max(complementarity / scale)
}

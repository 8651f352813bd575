//! Attitude quaternion stored as `[q1, q2, q3, q4]` (vector part first,
//! scalar last). The rotation maps body-frame vectors into Hill's frame and
//! the kinematics are `q̇ = ½ Ξ(q) ω` with `ω` expressed in the body frame.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|q| - 1` accepted by the checked rotation routines.
pub const UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Quat(pub [f64; 4]);

impl Quat {
    pub const IDENTITY: Quat = Quat([0.0, 0.0, 0.0, 1.0]);

    pub fn new(q1: f64, q2: f64, q3: f64, q4: f64) -> Self {
        Quat([q1, q2, q3, q4])
    }

    /// Rotation of `angle` radians about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let a = axis.normalize();
        let (s, c) = (0.5 * angle).sin_cos();
        Quat([a.x * s, a.y * s, a.z * s, c])
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.0[0], self.0[1], self.0[2])
    }

    pub fn scalar(&self) -> f64 {
        self.0[3]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Quat(self.0.map(|c| c / n))
    }

    pub fn conjugate(&self) -> Self {
        let [a, b, c, d] = self.0;
        Quat([-a, -b, -c, d])
    }

    /// Hamilton product `self ⊗ rhs`.
    pub fn mul(&self, rhs: &Quat) -> Quat {
        let (v1, s1) = (self.vector(), self.scalar());
        let (v2, s2) = (rhs.vector(), rhs.scalar());
        let v = v2 * s1 + v1 * s2 + v1.cross(&v2);
        Quat([v.x, v.y, v.z, s1 * s2 - v1.dot(&v2)])
    }

    pub fn check_unit(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > UNIT_TOLERANCE || !norm.is_finite() {
            return Err(Error::InvalidQuaternion { norm });
        }
        Ok(())
    }

    /// Body-to-Hill rotation matrix. No normalization is applied.
    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let v = self.vector();
        let s = self.scalar();
        let skew = v.cross_matrix();
        Matrix3::identity() * (s * s - v.dot(&v)) + v * v.transpose() * 2.0 + skew * (2.0 * s)
    }

    pub fn rotate(&self, body: &Vector3<f64>) -> Vector3<f64> {
        let v = self.vector();
        let s = self.scalar();
        let t = v.cross(body) * 2.0;
        body * (s * s - v.dot(&v)) + v * (2.0 * v.dot(body)) + t * s
    }

    pub fn rotate_inverse(&self, hill: &Vector3<f64>) -> Vector3<f64> {
        self.conjugate().rotate(hill)
    }

    /// `Ξ(q) ω`, so that `q̇ = ½ Ξ(q) ω`.
    pub fn xi_times(&self, omega: &Vector3<f64>) -> [f64; 4] {
        let [q1, q2, q3, q4] = self.0;
        let [w1, w2, w3] = [omega.x, omega.y, omega.z];
        [
            q4 * w1 - q3 * w2 + q2 * w3,
            q3 * w1 + q4 * w2 - q1 * w3,
            -q2 * w1 + q1 * w2 + q4 * w3,
            -q1 * w1 - q2 * w2 - q3 * w3,
        ]
    }
}

impl Default for Quat {
    fn default() -> Self {
        Quat::IDENTITY
    }
}

/// Rotate a body-frame vector into Hill's frame, rejecting non-unit
/// quaternions.
pub fn body_to_hill(q: &Quat, vec_body: &Vector3<f64>) -> Result<Vector3<f64>> {
    q.check_unit()?;
    Ok(q.rotate(vec_body))
}

pub fn hill_to_body(q: &Quat, vec_hill: &Vector3<f64>) -> Result<Vector3<f64>> {
    q.check_unit()?;
    Ok(q.rotate_inverse(vec_hill))
}

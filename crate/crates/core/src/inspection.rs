//! The chief's inspection sphere: point placement, priority weights,
//! illumination, field-of-view checks and uninspected-cluster direction.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::{DeputyState, SunState, Vec3};

pub const CHIEF_RADIUS: f64 = 10.0;
pub const DEFAULT_POINT_COUNT: usize = 100;

/// Deterministic Fibonacci-lattice points on a sphere of radius `radius`.
pub fn generate_points(n_points: usize, radius: f64) -> Vec<Vec3> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    let n = n_points as f64;
    (0..n_points)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z) * radius
        })
        .collect()
}

/// Point weights `(π − θ)/π`, normalized to sum to one, where `θ` is the
/// angle between the point and the priority direction.
pub fn priority_weights(points: &[Vec3], priority: &Vec3) -> Vec<f64> {
    let raw: Vec<f64> = points
        .iter()
        .map(|p| {
            let cos = (p.dot(priority) / (p.norm() * priority.norm())).clamp(-1.0, 1.0);
            (PI - cos.acos()) / PI
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Deputy sensor: boresight along body +x with a conical field of view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub boresight_body: Vec3,
    /// Full cone angle, rad.
    pub fov: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        SensorModel {
            boresight_body: Vec3::x(),
            fov: 20f64.to_radians(),
        }
    }
}

/// A point on the chief is lit when it faces the Sun. The chief is convex and
/// nothing else casts shadows, so the ray test reduces to the sign of
/// `n̂·r̂_sun`; grazing points count as dark.
pub fn is_illuminated(point: &Vec3, sun: &SunState) -> bool {
    point.dot(&sun.vector()) > 0.0
}

/// Visible when inside the sensor cone and on the hemisphere facing the
/// deputy.
pub fn is_in_view(point: &Vec3, deputy: &DeputyState, sensor: &SensorModel) -> bool {
    let p = deputy.trans.p;
    let los = point - p;
    let dist = los.norm();
    if dist == 0.0 {
        return false;
    }
    let boresight = deputy.att.q.rotate(&sensor.boresight_body);
    let cos_off = boresight.dot(&los) / (boresight.norm() * dist);
    let facing = point.dot(&(p - point)) > 0.0;
    facing && cos_off >= (0.5 * sensor.fov).cos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectionSphere {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub inspected: Vec<bool>,
    pub priority: Vec3,
}

impl InspectionSphere {
    pub fn new(n_points: usize, radius: f64, priority: Vec3) -> Self {
        let points = generate_points(n_points, radius);
        let weights = priority_weights(&points, &priority);
        InspectionSphere {
            inspected: vec![false; points.len()],
            points,
            weights,
            priority,
        }
    }

    pub fn with_priority(priority: Vec3) -> Self {
        Self::new(DEFAULT_POINT_COUNT, CHIEF_RADIUS, priority)
    }

    /// Total weight of inspected points.
    pub fn inspected_weight(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.inspected)
            .filter(|(_, i)| **i)
            .map(|(w, _)| w)
            .sum()
    }

    pub fn uninspected_count(&self) -> usize {
        self.inspected.iter().filter(|i| !**i).count()
    }

    /// Flip every uninspected point that is lit and seen by at least one
    /// deputy. Returns, per deputy, the indices of the newly inspected points
    /// it saw (a point seen by several deputies is listed for each).
    pub fn inspect_step(&mut self, deputies: &[DeputyState], sun: &SunState, sensor: &SensorModel) -> Vec<Vec<usize>> {
        let mut credit = vec![Vec::new(); deputies.len()];
        for (k, point) in self.points.iter().enumerate() {
            if self.inspected[k] || !is_illuminated(point, sun) {
                continue;
            }
            let mut seen = false;
            for (d, dep) in deputies.iter().enumerate() {
                if is_in_view(point, dep, sensor) {
                    credit[d].push(k);
                    seen = true;
                }
            }
            if seen {
                self.inspected[k] = true;
            }
        }
        credit
    }

    pub fn weight_of(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&k| self.weights[k]).sum()
    }
}

pub const KMEANS_MAX_CLUSTERS: usize = 6;
pub const KMEANS_MAX_ITERATIONS: usize = 50;
pub const KMEANS_TOLERANCE: f64 = 1e-6;

/// Lloyd's k-means with farthest-point seeding. The first seed is the point
/// at `seed % len`; every later seed is the point farthest from the seeds
/// chosen so far (lowest index on ties).
pub fn kmeans(points: &[Vec3], k: usize, seed: u64) -> Vec<Vec3> {
    if points.is_empty() || k == 0 {
        return Vec::new();
    }
    let k = k.min(points.len());
    let mut centers = vec![points[(seed % points.len() as u64) as usize]];
    let mut nearest: Vec<f64> = points.iter().map(|p| (p - centers[0]).norm_squared()).collect();
    while centers.len() < k {
        let (far, _) = nearest.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, &d)| if d > best.1 { (i, d) } else { best },
        );
        let c = points[far];
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min((p - c).norm_squared());
        }
        centers.push(c);
    }

    for _ in 0..KMEANS_MAX_ITERATIONS {
        let mut sums = vec![Vec3::zeros(); k];
        let mut counts = vec![0usize; k];
        for p in points {
            let j = nearest_index(&centers, p);
            sums[j] += p;
            counts[j] += 1;
        }
        let mut moved: f64 = 0.0;
        for j in 0..k {
            if counts[j] > 0 {
                let c = sums[j] / counts[j] as f64;
                moved = moved.max((c - centers[j]).norm());
                centers[j] = c;
            }
        }
        if moved < KMEANS_TOLERANCE {
            break;
        }
    }
    centers
}

fn nearest_index(centers: &[Vec3], p: &Vec3) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = (p - c).norm_squared();
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

/// Direction from the chief's center to the uninspected-point cluster whose
/// centroid is closest to the deputy. Zero when everything is inspected.
pub fn nearest_uninspected_cluster(sphere: &InspectionSphere, deputy: &DeputyState, seed: u64) -> Vec3 {
    let remaining: Vec<Vec3> = sphere
        .points
        .iter()
        .zip(&sphere.inspected)
        .filter(|(_, done)| !**done)
        .map(|(p, _)| *p)
        .collect();
    if remaining.is_empty() {
        return Vec3::zeros();
    }
    let centers = kmeans(&remaining, KMEANS_MAX_CLUSTERS, seed);
    let centroid = centers[nearest_index(&centers, &deputy.trans.p)];
    let norm = centroid.norm();
    if norm < 1e-12 {
        Vec3::zeros()
    } else {
        centroid / norm
    }
}

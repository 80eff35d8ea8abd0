use std::f64::consts::{PI, TAU};

use serde::Serialize;
use serde_json::json;

use crate::mesh::{ball_area, triangle_area, Point, Polyline, TriMesh};

use super::{boundary_distance, point_segment_distance, VerificationReport, VerifyError};

/// Largest backward step of Θ accepted as monotone.
pub const MONOTONE_TOLERANCE: f64 = 1e-3;

/// Cone pieces subtend at most this angle at the vertex.
const CONE_ANGLE_STEP: f64 = TAU / 1024.0;

/// Density ratios `Θ(r) = area(M ∩ B(p, r)) / (πr²)` over increasing radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProfile {
    pub center: [f64; 4],
    pub radii: Vec<f64>,
    pub theta: Vec<f64>,
    /// `max(0, max_i Θ(r_i) − Θ(r_{i+1}))`.
    pub monotone_violation: f64,
}

impl DensityProfile {
    fn new(center: &Point, radii: &[f64], areas: impl Fn(f64) -> f64) -> Result<Self, VerifyError> {
        check_radii(radii)?;
        let theta: Vec<f64> = radii.iter().map(|&r| areas(r) / (PI * r * r)).collect();
        let monotone_violation = theta.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
        Ok(Self {
            center: [center.x, center.y, center.z, center.w],
            radii: radii.to_vec(),
            theta,
            monotone_violation,
        })
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone_violation <= MONOTONE_TOLERANCE
    }
}

fn check_radii(radii: &[f64]) -> Result<(), VerifyError> {
    if radii.is_empty() {
        return Err(VerifyError::Invalid("at least one radius is needed".into()));
    }
    if !(radii[0] > 0.0) || radii.iter().any(|r| !r.is_finite()) {
        return Err(VerifyError::Invalid("radii must be positive and finite".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(VerifyError::Invalid("radii must be strictly increasing".into()));
    }
    Ok(())
}

/// Extrinsic density profile of `mesh` about `p`.
pub fn density_profile(mesh: &TriMesh, p: &Point, radii: &[f64]) -> Result<DensityProfile, VerifyError> {
    DensityProfile::new(p, radii, |r| ball_area(mesh, p, r))
}

/// Monotonicity of Θ. Radii beyond `dist(p, ∂M)` make the report informative.
pub fn density_check(mesh: &TriMesh, p: &Point, radii: &[f64]) -> Result<VerificationReport, VerifyError> {
    let prof = density_profile(mesh, p, radii)?;
    let reach = boundary_distance(mesh, p);
    let inside = prof.radii.iter().all(|&r| r <= reach);
    let details = json!({
        "distance": "extrinsic",
        "boundary_distance": reach,
        "radii": prof.radii,
        "theta": prof.theta,
        "cone_defect": cone_defect(mesh, p, *prof.radii.last().unwrap()),
    });
    let (first, last) = (prof.theta[0], *prof.theta.last().unwrap());
    let v = prof.monotone_violation;
    Ok(if inside {
        VerificationReport::judged("density", first, last, v, MONOTONE_TOLERANCE, details)
    } else {
        VerificationReport::informative("density", first, last, v, details)
    })
}

/// Area-weighted mean of `((x − p)·ν)² / |x − p|²` over faces whose centroid
/// lies in `B(p, r)`: zero exactly when the surface is a cone about `p` there,
/// the equality case of monotonicity. `None` outside R³ or for an empty ball.
pub fn cone_defect(mesh: &TriMesh, p: &Point, r: f64) -> Option<f64> {
    let normals = mesh.face_normals().ok()?;
    let v = mesh.vertices();
    let (mut acc, mut area) = (0.0, 0.0);
    for (f, tri) in mesh.faces().iter().enumerate() {
        let c = (v[tri[0]] + v[tri[1]] + v[tri[2]]) / 3.0 - p;
        let d = c.norm();
        if d >= r || d == 0.0 {
            continue;
        }
        let a = mesh.face_area(f);
        let along = c.x * normals[f].x + c.y * normals[f].y + c.z * normals[f].z;
        acc += a * (along / d).powi(2);
        area += a;
    }
    (area > 0.0).then(|| acc / area)
}

/// Exterior cone `{p + t(q − p) : t ≥ 1, q ∈ γ}` truncated at `|x − p| = r_max`.
///
/// Each segment of `gamma` is split into pieces subtending at most 2π/1024 at
/// `p`, and each piece spans a planar strip out to its dilation onto the
/// sphere of radius `r_max`. Pieces reaching past `r_max` and pieces in line
/// with `p` are left out. Faces are oriented so that a disk bounded by `gamma`
/// with the induced orientation continues across it.
pub fn exterior_cone(gamma: &Polyline, p: &Point, r_max: f64) -> Result<TriMesh, VerifyError> {
    let scale = gamma.points.iter().map(|q| (q - p).norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for (a, b) in gamma.segments() {
        if point_segment_distance(p, &a, &b) <= 1e-12 * scale {
            return Err(VerifyError::PointOnCurve([p.x, p.y, p.z, p.w]));
        }
    }
    let mut samples: Vec<Point> = Vec::new();
    for (a, b) in gamma.segments() {
        let angle = angle_at(p, &a, &b);
        let pieces = ((angle / CONE_ANGLE_STEP - 1e-9).ceil() as usize).max(1);
        samples.extend((0..pieces).map(|k| a + (b - a) * (k as f64 / pieces as f64)));
    }
    if !gamma.closed {
        samples.push(*gamma.points.last().unwrap());
    }
    let n = samples.len();
    let far: Vec<Point> = samples.iter().map(|q| p + (q - p) * (r_max / (q - p).norm())).collect();
    let inside: Vec<bool> = samples.iter().map(|q| (q - p).norm() * (1.0 + 1e-12) < r_max).collect();
    let count = if gamma.closed { n } else { n - 1 };
    let floor = 1e-12 * r_max * r_max;

    let mut faces = Vec::new();
    for k in 0..count {
        let (i, j) = (k, (k + 1) % n);
        if !inside[i] || !inside[j] {
            continue;
        }
        let (q0, q1, f0, f1) = (samples[i], samples[j], far[i], far[j]);
        if triangle_area(&q1, &q0, &f0) <= floor || triangle_area(&q1, &f0, &f1) <= floor {
            continue;
        }
        faces.push([j, i, n + i]);
        faces.push([j, n + i, n + j]);
    }
    let mut verts = samples;
    verts.extend(far);
    let full = TriMesh::new(gamma.dim, verts, faces)?;
    Ok(full.sub_mesh(|_, _| true))
}

fn angle_at(p: &Point, a: &Point, b: &Point) -> f64 {
    let (u, v) = (a - p, b - p);
    let uv = u.dot(&v);
    let cross = (u.norm_squared() * v.norm_squared() - uv * uv).max(0.0).sqrt();
    cross.atan2(uv)
}

/// Density of `M ∪ E` where `E` is the exterior cone over every boundary loop,
/// truncated far enough out that no ball in the sweep reaches its rim.
pub fn extended_density_profile(mesh: &TriMesh, p: &Point, radii: &[f64]) -> Result<DensityProfile, VerifyError> {
    check_radii(radii)?;
    let cones = extended_cones(mesh, p, *radii.last().unwrap())?;
    DensityProfile::new(p, radii, |r| ball_area(mesh, p, r) + ball_area(&cones, p, r))
}

fn extended_cones(mesh: &TriMesh, p: &Point, r_top: f64) -> Result<TriMesh, VerifyError> {
    let loops = mesh.boundary_polylines();
    let far = loops
        .iter()
        .flat_map(|l| l.points.iter())
        .map(|q| (q - p).norm())
        .fold(r_top, f64::max);
    let r_max = 2.0 * far;
    let mut cones = TriMesh::empty(mesh.dim());
    for l in &loops {
        cones = cones.disjoint_union(&exterior_cone(l, p, r_max)?);
    }
    Ok(cones)
}

/// Monotonicity of the extended density over the full radius sweep.
pub fn extended_density_check(mesh: &TriMesh, p: &Point, radii: &[f64]) -> Result<VerificationReport, VerifyError> {
    let prof = extended_density_profile(mesh, p, radii)?;
    let details = json!({
        "distance": "extrinsic",
        "boundary_loops": mesh.boundary_loops().len(),
        "radii": prof.radii,
        "theta": prof.theta,
    });
    Ok(VerificationReport::judged(
        "extended_density",
        prof.theta[0],
        *prof.theta.last().unwrap(),
        prof.monotone_violation,
        MONOTONE_TOLERANCE,
        details,
    ))
}

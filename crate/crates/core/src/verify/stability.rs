use std::f64::consts::PI;

use serde_json::json;

use crate::linalg::{smallest_generalized_eigenvalues, SymmetricBuilder};
use crate::mesh::{triangle_area, Point, TriMesh};

use super::{VerificationReport, VerifyError};

/// Per-vertex `|A|² = −2K`: from a `K` attribute when the mesh carries one,
/// otherwise from the angle defect over the barycentric vertex area. Boundary
/// vertices get 0 in the second case.
pub fn second_fundamental_sq(mesh: &TriMesh) -> Vec<f64> {
    if let Some(k) = mesh.attribute("K") {
        return k.iter().map(|&k| (-2.0 * k).max(0.0)).collect();
    }
    let defects = mesh.angle_defects();
    let areas = mesh.vertex_areas();
    (0..mesh.vertex_count())
        .map(|v| {
            if defects.is_boundary[v] || areas[v] <= 0.0 {
                0.0
            } else {
                (2.0 * defects.per_vertex[v] / areas[v]).max(0.0)
            }
        })
        .collect()
}

/// Area of `{d ≤ level}` for the piecewise-linear interpolant of `d`.
pub fn sublevel_area(mesh: &TriMesh, d: &[f64], level: f64) -> f64 {
    (0..mesh.face_count()).map(|f| clipped_face_area(mesh, f, d, level)).sum()
}

fn clipped_face_area(mesh: &TriMesh, f: usize, d: &[f64], level: f64) -> f64 {
    let v = mesh.vertices();
    let tri = mesh.faces()[f];
    let vals = tri.map(|i| d[i]);
    if vals.iter().all(|&x| x <= level) {
        return mesh.face_area(f);
    }
    if vals.iter().all(|&x| x > level) {
        return 0.0;
    }
    // clip the triangle against the half-plane d ≤ level
    let mut poly: Vec<Point> = Vec::with_capacity(4);
    for k in 0..3 {
        let (a, b) = (tri[k], tri[(k + 1) % 3]);
        let (da, db) = (d[a], d[b]);
        if da <= level {
            poly.push(v[a]);
        }
        if (da <= level) != (db <= level) {
            let t = (level - da) / (db - da);
            poly.push(v[a] + (v[b] - v[a]) * t);
        }
    }
    (1..poly.len().saturating_sub(1))
        .map(|k| triangle_area(&poly[0], &poly[k], &poly[k + 1]))
        .sum()
}

/// `|∇d|²` of the linear interpolant on face `f`, by the cotangent formula.
fn face_gradient_sq(mesh: &TriMesh, f: usize, d: &[f64]) -> f64 {
    let tri = mesh.faces()[f];
    let ang = mesh.corner_angles(f);
    let energy: f64 = (0..3)
        .map(|k| {
            let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            0.5 / ang[k].tan() * (d[i] - d[j]).powi(2)
        })
        .sum();
    energy / mesh.face_area(f)
}

/// Jacobi operator restricted to interior vertices: stiffness
/// `Σ w_ij (u_i − u_j)² − Σ |A_i|² m_i u_i²`, lumped mass `m_i`, and the
/// interior index of each mesh vertex.
fn jacobi_pencil(mesh: &TriMesh) -> (SymmetricBuilder, Vec<f64>, Vec<Option<usize>>) {
    let flags = mesh.boundary_flags();
    let mut index = vec![None; mesh.vertex_count()];
    let mut n = 0;
    for (v, slot) in index.iter_mut().enumerate() {
        if !flags[v] {
            *slot = Some(n);
            n += 1;
        }
    }
    let mass_all = mesh.vertex_areas();
    let a2 = second_fundamental_sq(mesh);
    let mut s = SymmetricBuilder::new(n);
    let mut mass = vec![0.0; n];
    for &((i, j), w) in &mesh.cotan_weights() {
        match (index[i], index[j]) {
            (Some(a), Some(b)) => {
                s.add(a, a, w);
                s.add(b, b, w);
                s.add(a, b, -w);
            }
            (Some(a), None) => s.add(a, a, w),
            (None, Some(b)) => s.add(b, b, w),
            (None, None) => {}
        }
    }
    for v in 0..mesh.vertex_count() {
        if let Some(a) = index[v] {
            mass[a] = mass_all[v];
            s.add(a, a, -a2[v] * mass_all[v]);
        }
    }
    (s, mass, index)
}

/// The `k` smallest eigenvalues of the Jacobi operator with Dirichlet
/// conditions on the boundary.
pub fn jacobi_spectrum(mesh: &TriMesh, k: usize) -> Result<Vec<f64>, VerifyError> {
    let (s, mass, _) = jacobi_pencil(mesh);
    if mass.iter().any(|&m| m <= 0.0) {
        return Err(VerifyError::Invalid("interior vertex with no incident area".into()));
    }
    Ok(smallest_generalized_eigenvalues(&s, &mass, k)?)
}

/// Smallest Jacobi eigenvalues; stable iff the first is positive.
pub fn jacobi_check(mesh: &TriMesh, k: usize) -> Result<VerificationReport, VerifyError> {
    let interior = mesh.boundary_flags().iter().filter(|b| !**b).count();
    let ev = jacobi_spectrum(mesh, k.min(interior))?;
    let lambda = ev[0];
    Ok(VerificationReport::informative(
        "jacobi",
        lambda,
        0.0,
        0.0,
        json!({
            "eigenvalues": ev,
            "stable": lambda > 0.0,
            "curvature_source": if mesh.attribute("K").is_some() { "K attribute" } else { "angle defect" },
        }),
    ))
}

/// `Q(u)` for `u = max(0, (R − r)/R)` with `r` the intrinsic distance from
/// `p`, against `4π − 3A(R)/R²`.
///
/// `u` is the positive part of the linear interpolant of `(R − r)/R`, so its
/// gradient term is integrated exactly over the part of each face inside the
/// ball; the curvature term uses the lumped mass.
pub fn pogorelov_check(mesh: &TriMesh, p: usize, radius: f64) -> Result<VerificationReport, VerifyError> {
    if p >= mesh.vertex_count() {
        return Err(VerifyError::Invalid(format!("vertex {p} is out of range")));
    }
    if !(radius > 0.0) {
        return Err(VerifyError::Invalid("Pogorelov radius must be positive".into()));
    }
    let d = mesh.fast_marching(&[p]);
    let flags = mesh.boundary_flags();
    if (0..flags.len()).any(|v| flags[v] && d[v] <= radius) {
        return Err(VerifyError::BallTouchesBoundary { center: p, radius });
    }
    let u: Vec<f64> = d.iter().map(|&r| ((radius - r) / radius).max(0.0)).collect();
    let gradient: f64 = (0..mesh.face_count())
        .map(|f| face_gradient_sq(mesh, f, &d) * clipped_face_area(mesh, f, &d, radius))
        .sum::<f64>()
        / (radius * radius);
    let a2 = second_fundamental_sq(mesh);
    let m = mesh.vertex_areas();
    let potential: f64 = (0..u.len()).map(|i| a2[i] * u[i] * u[i] * m[i]).sum();
    let q = gradient - potential;
    let area = sublevel_area(mesh, &d, radius);
    let rhs = 4.0 * PI - 3.0 * area / (radius * radius);
    let discrepancy = (q - rhs).abs() / rhs.abs().max(PI);
    Ok(VerificationReport::judged(
        "pogorelov",
        q,
        rhs,
        discrepancy,
        0.05,
        json!({
            "distance": "intrinsic (fast marching)",
            "center": p,
            "radius": radius,
            "ball_area": area,
            "gradient_term": gradient,
            "curvature_term": potential,
            "negative": q < 0.0,
            "simply_connected": mesh.euler_characteristic() == 1,
        }),
    ))
}

/// Intrinsic ball density `A(r)/(πr²)` up to the boundary, beside
/// `1 + TC(ball)/2π` at the largest radius.
pub fn intrinsic_density_check(mesh: &TriMesh, p: usize) -> Result<VerificationReport, VerifyError> {
    if p >= mesh.vertex_count() {
        return Err(VerifyError::Invalid(format!("vertex {p} is out of range")));
    }
    let d = mesh.fast_marching(&[p]);
    let flags = mesh.boundary_flags();
    let reach = (0..flags.len())
        .filter(|&v| flags[v])
        .map(|v| d[v])
        .fold(f64::INFINITY, f64::min);
    if !reach.is_finite() || reach <= 0.0 {
        return Err(VerifyError::Invalid("intrinsic density needs a boundary away from the center".into()));
    }
    let radii: Vec<f64> = (1..=20).map(|k| reach * k as f64 / 20.0).collect();
    let profile: Vec<f64> = radii.iter().map(|&r| sublevel_area(mesh, &d, r) / (PI * r * r)).collect();
    let ball = mesh.sub_mesh(|_, f| f.iter().all(|&v| d[v] <= reach));
    let tc = ball.angle_defects().total_curvature;
    let predicted = 1.0 + tc / (2.0 * PI);
    let last = *profile.last().unwrap();
    let simply_connected = mesh.euler_characteristic() == 1;
    let mut details = json!({
        "distance": "intrinsic (fast marching)",
        "radii": radii,
        "profile": profile,
        "ball_total_curvature": tc,
        "simply_connected": simply_connected,
    });
    if !simply_connected {
        details["note"] = json!("mesh is not simply connected; the intrinsic density relation does not apply");
    }
    Ok(VerificationReport::informative(
        "intrinsic_density",
        last,
        predicted,
        (last - predicted).abs(),
        details,
    ))
}

/// `sup |A(p)| · dist_M(p, ∂M)` over interior vertices.
pub fn curvature_estimate_stat(mesh: &TriMesh) -> f64 {
    let a2 = second_fundamental_sq(mesh);
    let d = mesh.fast_marching_to_boundary();
    let flags = mesh.boundary_flags();
    (0..a2.len())
        .filter(|&v| !flags[v] && d[v].is_finite())
        .map(|v| a2[v].sqrt() * d[v])
        .fold(0.0, f64::max)
}

/// The curvature-estimate statistic beside the mesh's total curvature.
pub fn curvature_estimate_check(mesh: &TriMesh) -> Result<VerificationReport, VerifyError> {
    let stat = curvature_estimate_stat(mesh);
    let tc = mesh.angle_defects().total_curvature;
    Ok(VerificationReport::informative(
        "curvature_estimate",
        stat,
        tc,
        0.0,
        json!({
            "distance": "intrinsic (fast marching)",
            "total_curvature": tc,
            "below_4pi": tc < 4.0 * PI,
        }),
    ))
}

//! Area of a mesh inside a closed extrinsic ball.
//!
//! [`ball_area`] clips each triangle exactly: the ball meets the triangle's
//! plane in a disk, and the disk–triangle overlap is a sum of triangle and
//! circular-sector pieces. It is monotone in the radius up to rounding.
//! [`ball_area_subdivided`] is the recursive 4-way subdivision estimate
//! with centroid classification, kept as an independent cross-check.

use rayon::prelude::*;

use super::{triangle_area, Point, TriMesh};

/// Area of `mesh ∩ B(p, r)`.
pub fn ball_area(mesh: &TriMesh, p: &Point, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let v = mesh.vertices();
    // collect before summing so the result does not depend on thread scheduling
    let parts: Vec<f64> = mesh
        .faces()
        .par_iter()
        .map(|f| triangle_ball_area(&v[f[0]], &v[f[1]], &v[f[2]], p, r))
        .collect();
    parts.iter().sum()
}

/// Exact area of the triangle (a, b, c) inside the closed ball B(p, r), in any dimension.
pub fn triangle_ball_area(a: &Point, b: &Point, c: &Point, p: &Point, r: f64) -> f64 {
    let r2 = r * r;
    let da = (a - p).norm_squared();
    let db = (b - p).norm_squared();
    let dc = (c - p).norm_squared();
    if da <= r2 && db <= r2 && dc <= r2 {
        return triangle_area(a, b, c);
    }
    // orthonormal frame of the triangle's plane
    let u = b - a;
    let e1 = u / u.norm();
    let w = c - a;
    let w_perp = w - e1 * w.dot(&e1);
    let wn = w_perp.norm();
    if wn == 0.0 {
        return 0.0;
    }
    let e2 = w_perp / wn;
    let rel = p - a;
    let (px, py) = (rel.dot(&e1), rel.dot(&e2));
    let off_plane2 = (rel.norm_squared() - px * px - py * py).max(0.0);
    if off_plane2 >= r2 {
        return 0.0;
    }
    let rho = (r2 - off_plane2).sqrt();
    // triangle in plane coordinates, centered on the disk center
    let pa = (-px, -py);
    let pb = (u.dot(&e1) - px, u.dot(&e2) - py);
    let pc = (w.dot(&e1) - px, w.dot(&e2) - py);
    let s = edge_disk_area(pa, pb, rho) + edge_disk_area(pb, pc, rho) + edge_disk_area(pc, pa, rho);
    s.abs()
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

fn sector(a: (f64, f64), b: (f64, f64), rho: f64) -> f64 {
    0.5 * rho * rho * cross(a, b).atan2(dot(a, b))
}

fn lerp(a: (f64, f64), b: (f64, f64), t: f64) -> (f64, f64) {
    (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t)
}

/// Signed area of the intersection of triangle (0, a, b) with the disk of
/// radius `rho` centered at the origin.
fn edge_disk_area(a: (f64, f64), b: (f64, f64), rho: f64) -> f64 {
    let r2 = rho * rho;
    let a_in = dot(a, a) <= r2;
    let b_in = dot(b, b) <= r2;
    if a_in && b_in {
        return 0.5 * cross(a, b);
    }
    // |a + t(b - a)|² = r²
    let d = (b.0 - a.0, b.1 - a.1);
    let qa = dot(d, d);
    let qb = 2.0 * dot(a, d);
    let qc = dot(a, a) - r2;
    let disc = qb * qb - 4.0 * qa * qc;
    if qa == 0.0 {
        return 0.0;
    }
    if disc <= 0.0 {
        return sector(a, b, rho);
    }
    let sq = disc.sqrt();
    let t0 = (-qb - sq) / (2.0 * qa);
    let t1 = (-qb + sq) / (2.0 * qa);
    match (a_in, b_in) {
        (true, false) => {
            let x = lerp(a, b, t1.clamp(0.0, 1.0));
            0.5 * cross(a, x) + sector(x, b, rho)
        }
        (false, true) => {
            let x = lerp(a, b, t0.clamp(0.0, 1.0));
            sector(a, x, rho) + 0.5 * cross(x, b)
        }
        _ => {
            // endpoints on the circle may test as outside by rounding
            let (t0, t1) = (t0.max(0.0), t1.min(1.0));
            if t0 < t1 {
                let x0 = lerp(a, b, t0);
                let x1 = lerp(a, b, t1);
                sector(a, x0, rho) + 0.5 * cross(x0, x1) + sector(x1, b, rho)
            } else {
                sector(a, b, rho)
            }
        }
    }
}

/// Recursive subdivision estimate: triangles wholly inside count fully, wholly
/// outside count zero, straddling ones split 4-way until their area is below
/// `min_frac · r²` and are then classified by centroid.
pub fn ball_area_subdivided(mesh: &TriMesh, p: &Point, r: f64, min_frac: f64) -> f64 {
    let v = mesh.vertices();
    let floor = min_frac * r * r;
    let parts: Vec<f64> = mesh
        .faces()
        .par_iter()
        .map(|f| subdivide(&v[f[0]], &v[f[1]], &v[f[2]], p, r, floor, 0))
        .collect();
    parts.iter().sum()
}

fn subdivide(a: &Point, b: &Point, c: &Point, p: &Point, r: f64, floor: f64, depth: u32) -> f64 {
    let r2 = r * r;
    let inside = [a, b, c].iter().filter(|v| (**v - p).norm_squared() <= r2).count();
    let area = triangle_area(a, b, c);
    if inside == 3 {
        return area;
    }
    if inside == 0 && distance_to_triangle_lower_bound(a, b, c, p) > r {
        return 0.0;
    }
    if area <= floor || depth > 30 {
        let centroid = (a + b + c) / 3.0;
        return if (centroid - p).norm_squared() <= r2 { area } else { 0.0 };
    }
    let ab = (a + b) * 0.5;
    let bc = (b + c) * 0.5;
    let ca = (c + a) * 0.5;
    subdivide(a, &ab, &ca, p, r, floor, depth + 1)
        + subdivide(&ab, b, &bc, p, r, floor, depth + 1)
        + subdivide(&ca, &bc, c, p, r, floor, depth + 1)
        + subdivide(&ab, &bc, &ca, p, r, floor, depth + 1)
}

/// Distance from `p` to the triangle's circumscribing bounding sphere shell:
/// centroid distance minus the farthest vertex distance from the centroid.
fn distance_to_triangle_lower_bound(a: &Point, b: &Point, c: &Point, p: &Point) -> f64 {
    let g = (a + b + c) / 3.0;
    let rad = [(a - g).norm(), (b - g).norm(), (c - g).norm()]
        .into_iter()
        .fold(0.0, f64::max);
    (g - p).norm() - rad
}

//! Convex hull of boundary vertices and how far interior vertices stick out of it.

use nalgebra::{Vector2, Vector3};

use super::measure::to3;
use super::{MeshError, TriMesh};

/// Convex hull of a point set in R³, or of a planar set when all points are coplanar.
#[derive(Debug, Clone)]
pub enum ConvexHull {
    Solid {
        points: Vec<Vector3<f64>>,
        /// outward-oriented triangles
        faces: Vec<[usize; 3]>,
    },
    Planar {
        origin: Vector3<f64>,
        normal: Vector3<f64>,
        axes: [Vector3<f64>; 2],
        /// counter-clockwise hull polygon in plane coordinates
        polygon: Vec<Vector2<f64>>,
        tolerance: f64,
    },
}

impl ConvexHull {
    /// Incremental construction. Points within `1e-9 · scale` of a plane
    /// spanned by the others are treated as coplanar.
    pub fn new(points: &[Vector3<f64>]) -> Option<Self> {
        if points.len() < 3 {
            return None;
        }
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let scale = (hi - lo).max().max(f64::MIN_POSITIVE);
        let tol = 1e-9 * scale;

        let i0 = 0;
        let i1 = farthest(points, |p| (p - points[i0]).norm());
        let dir = (points[i1] - points[i0]).normalize();
        let i2 = farthest(points, |p| {
            let d = p - points[i0];
            (d - dir * d.dot(&dir)).norm()
        });
        let n = (points[i1] - points[i0]).cross(&(points[i2] - points[i0]));
        if n.norm() <= tol * scale {
            return None;
        }
        let n = n.normalize();
        let i3 = farthest(points, |p| (p - points[i0]).dot(&n).abs());
        if (points[i3] - points[i0]).dot(&n).abs() <= tol {
            return Some(Self::planar(points, points[i0], n, tol));
        }

        let mut faces: Vec<[usize; 3]> = vec![[i0, i1, i2], [i0, i3, i1], [i1, i3, i2], [i2, i3, i0]];
        let inner = (points[i0] + points[i1] + points[i2] + points[i3]) / 4.0;
        for f in &mut faces {
            if plane_distance(points, f, &inner) > 0.0 {
                f.swap(1, 2);
            }
        }
        for (k, p) in points.iter().enumerate() {
            if [i0, i1, i2, i3].contains(&k) {
                continue;
            }
            let visible: Vec<bool> = faces.iter().map(|f| plane_distance(points, f, p) > tol).collect();
            if !visible.iter().any(|&v| v) {
                continue;
            }
            let mut hidden_edges = std::collections::HashSet::new();
            for (f, vis) in faces.iter().zip(&visible) {
                if !vis {
                    for e in 0..3 {
                        hidden_edges.insert((f[e], f[(e + 1) % 3]));
                    }
                }
            }
            let mut next = Vec::new();
            let mut horizon = Vec::new();
            for (f, vis) in faces.iter().zip(&visible) {
                if *vis {
                    for e in 0..3 {
                        let (a, b) = (f[e], f[(e + 1) % 3]);
                        if hidden_edges.contains(&(b, a)) {
                            horizon.push((a, b));
                        }
                    }
                } else {
                    next.push(*f);
                }
            }
            for (a, b) in horizon {
                next.push([a, b, k]);
            }
            faces = next;
        }
        Some(Self::Solid {
            points: points.to_vec(),
            faces,
        })
    }

    fn planar(points: &[Vector3<f64>], origin: Vector3<f64>, normal: Vector3<f64>, tol: f64) -> Self {
        let seed = if normal.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let e1 = (seed - normal * seed.dot(&normal)).normalize();
        let e2 = normal.cross(&e1);
        let mut pts: Vec<Vector2<f64>> = points
            .iter()
            .map(|p| Vector2::new((p - origin).dot(&e1), (p - origin).dot(&e2)))
            .collect();
        pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
        pts.dedup();
        // Andrew's monotone chain
        let turn = |o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>| {
            (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
        };
        let mut hull: Vec<Vector2<f64>> = Vec::new();
        for p in pts.iter().chain(pts.iter().rev().skip(1)) {
            while hull.len() >= 2 && turn(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
        Self::Planar {
            origin,
            normal,
            axes: [e1, e2],
            polygon: hull,
            tolerance: tol,
        }
    }

    /// Signed distance: negative inside (distance to the hull boundary),
    /// positive outside (Euclidean distance to the hull).
    pub fn signed_distance(&self, x: &Vector3<f64>) -> f64 {
        match self {
            ConvexHull::Solid { points, faces } => {
                let max_plane = faces
                    .iter()
                    .map(|f| plane_distance(points, f, x))
                    .fold(f64::NEG_INFINITY, f64::max);
                if max_plane <= 0.0 {
                    max_plane
                } else {
                    faces
                        .iter()
                        .map(|f| point_triangle_distance(x, &points[f[0]], &points[f[1]], &points[f[2]]))
                        .fold(f64::INFINITY, f64::min)
                }
            }
            ConvexHull::Planar {
                origin,
                normal,
                axes,
                polygon,
                tolerance,
            } => {
                let rel = x - origin;
                let h = rel.dot(normal);
                let q = Vector2::new(rel.dot(&axes[0]), rel.dot(&axes[1]));
                let sd = polygon_signed_distance(polygon, &q);
                if sd <= 0.0 {
                    if h.abs() > *tolerance {
                        h.abs()
                    } else {
                        sd
                    }
                } else {
                    (h * h + sd * sd).sqrt()
                }
            }
        }
    }
}

fn farthest<F: Fn(&Vector3<f64>) -> f64>(points: &[Vector3<f64>], f: F) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, p) in points.iter().enumerate() {
        let v = f(p);
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

fn plane_distance(points: &[Vector3<f64>], f: &[usize; 3], x: &Vector3<f64>) -> f64 {
    let a = points[f[0]];
    let n = (points[f[1]] - a).cross(&(points[f[2]] - a));
    let len = n.norm();
    if len == 0.0 {
        return f64::NEG_INFINITY;
    }
    (x - a).dot(&n) / len
}

fn polygon_signed_distance(poly: &[Vector2<f64>], q: &Vector2<f64>) -> f64 {
    let n = poly.len();
    let mut inside = true;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = b - a;
        let cross = e.x * (q.y - a.y) - e.y * (q.x - a.x);
        if cross < 0.0 {
            inside = false;
        }
        let t = ((q - a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
        best = best.min((q - (a + e * t)).norm());
    }
    if inside {
        -best
    } else {
        best
    }
}

fn point_triangle_distance(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let n = (b - a).cross(&(c - a));
    let nn = n.norm_squared();
    if nn > 0.0 {
        let h = (p - a).dot(&n) / nn;
        let proj = p - n * h;
        // barycentric test
        let inside = [(a, b), (b, c), (c, a)]
            .iter()
            .all(|(u, v)| (*v - *u).cross(&(proj - *u)).dot(&n) >= 0.0);
        if inside {
            return (p - proj).norm();
        }
    }
    [(a, b), (b, c), (c, a)]
        .iter()
        .map(|(u, v)| {
            let e = *v - *u;
            let t = ((p - *u).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
            (p - (*u + e * t)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest signed distance of an interior vertex outside the convex hull of
/// the boundary vertices (≤ 0 means every interior vertex is contained).
pub fn convex_hull_violation(mesh: &TriMesh) -> Result<f64, MeshError> {
    mesh.require_dim("convex hull violation", 3)?;
    let flags = mesh.boundary_flags();
    let boundary: Vec<Vector3<f64>> = (0..flags.len())
        .filter(|&v| flags[v])
        .map(|v| to3(&mesh.vertices()[v]))
        .collect();
    if boundary.is_empty() {
        return Err(MeshError::NoBoundary);
    }
    let hull = ConvexHull::new(&boundary).ok_or(MeshError::NoBoundary)?;
    let mut used = vec![false; flags.len()];
    for f in mesh.faces() {
        for &v in f {
            used[v] = true;
        }
    }
    Ok((0..flags.len())
        .filter(|&v| !flags[v] && used[v])
        .map(|v| hull.signed_distance(&to3(&mesh.vertices()[v])))
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::super::generate;
    use super::*;

    #[test]
    fn flat_disk_is_contained() {
        let d = generate::flat_disk(8, 1.0);
        assert!(convex_hull_violation(&d).unwrap() <= 0.0);
    }

    #[test]
    fn hemisphere_pole_sticks_out() {
        let h = generate::hemisphere(8, 1.0);
        let v = convex_hull_violation(&h).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn cube_hull_distances() {
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    pts.push(Vector3::new(x, y, z));
                }
            }
        }
        // extra coplanar face points exercise the tolerance path
        pts.push(Vector3::new(0.5, 0.5, 1.0));
        pts.push(Vector3::new(0.5, 0.0, 0.5));
        let hull = ConvexHull::new(&pts).unwrap();
        assert!((hull.signed_distance(&Vector3::new(0.5, 0.5, 0.5)) + 0.5).abs() < 1e-12);
        assert!((hull.signed_distance(&Vector3::new(0.5, 0.5, 3.0)) - 2.0).abs() < 1e-12);
        assert!((hull.signed_distance(&Vector3::new(2.0, 2.0, 0.5)) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn no_boundary_is_an_error() {
        let h = generate::hemisphere(4, 1.0);
        let doubled = h.disjoint_union(&h.map_vertices(|p| nalgebra::Vector4::new(p.x, p.y, -p.z, 0.0)));
        // not glued, so still has boundary; check the error on an empty mesh instead
        assert!(convex_hull_violation(&doubled).is_ok());
        assert!(matches!(convex_hull_violation(&TriMesh::empty(3)), Err(MeshError::NoBoundary)));
    }
}

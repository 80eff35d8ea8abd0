//! Simple test surfaces and grid connectivity helpers.

use std::f64::consts::{FRAC_PI_2, TAU};

use super::{point3, Point, TriMesh};

/// Faces joining two concentric vertex rings whose vertices are listed by
/// increasing angle starting at angle `inner_phase`/`outer_phase` (fractions of a turn).
/// Triangles are counter-clockwise when the inner ring is closer to the center.
pub fn join_rings(inner: &[usize], inner_phase: f64, outer: &[usize], outer_phase: f64) -> Vec<[usize; 3]> {
    let ni = inner.len();
    let no = outer.len();
    let angle = |phase: f64, k: usize, n: usize| phase + k as f64 / n as f64;
    let mut faces = Vec::with_capacity(ni + no);
    let (mut i, mut o) = (0usize, 0usize);
    // walk once around, always advancing the ring whose next vertex comes first
    while i < ni || o < no {
        let next_i = angle(inner_phase, i + 1, ni);
        let next_o = angle(outer_phase, o + 1, no);
        if o < no && (i >= ni || next_o <= next_i) {
            faces.push([inner[i % ni], outer[o % no], outer[(o + 1) % no]]);
            o += 1;
        } else {
            faces.push([inner[i % ni], outer[o % no], inner[(i + 1) % ni]]);
            i += 1;
        }
    }
    faces
}

/// Unit-spaced concentric ring disk: ring k has 6k vertices at radius k/rings.
/// Vertex 0 is the center; rings follow in order.
pub fn flat_disk(rings: usize, radius: f64) -> TriMesh {
    let (verts, faces) = hex_ring_disk(rings, |r, a| point3(radius * r * a.cos(), radius * r * a.sin(), 0.0));
    TriMesh::new(3, verts, faces).expect("flat disk is a valid mesh")
}

/// Upper unit hemisphere (z ≥ 0) with the same ring structure as [`flat_disk`];
/// the pole is vertex 0 and the equator is the boundary.
pub fn hemisphere(rings: usize, radius: f64) -> TriMesh {
    let (verts, faces) = hex_ring_disk(rings, |r, a| {
        let phi = r * FRAC_PI_2;
        point3(
            radius * phi.sin() * a.cos(),
            radius * phi.sin() * a.sin(),
            radius * phi.cos(),
        )
    });
    TriMesh::new(3, verts, faces).expect("hemisphere is a valid mesh")
}

fn hex_ring_disk<F: Fn(f64, f64) -> Point>(rings: usize, place: F) -> (Vec<Point>, Vec<[usize; 3]>) {
    let rings = rings.max(1);
    let mut verts = vec![place(0.0, 0.0)];
    let mut ring_ids: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..=rings {
        let n = 6 * k;
        let r = k as f64 / rings as f64;
        let ids: Vec<usize> = (0..n)
            .map(|j| {
                verts.push(place(r, TAU * j as f64 / n as f64));
                verts.len() - 1
            })
            .collect();
        ring_ids.push(ids);
    }
    let mut faces = Vec::new();
    for j in 0..6 {
        faces.push([0, ring_ids[1][j], ring_ids[1][(j + 1) % 6]]);
    }
    for k in 2..=rings {
        faces.extend(join_rings(&ring_ids[k - 1], 0.0, &ring_ids[k], 0.0));
    }
    (verts, faces)
}

/// Faces of a `nu × nv` node grid (node (i, j) has index `j * nu + i`), two
/// triangles per cell. With `periodic_u` the last column connects to the first.
pub fn grid_faces(nu: usize, nv: usize, periodic_u: bool) -> Vec<[usize; 3]> {
    let cols = if periodic_u { nu } else { nu - 1 };
    let mut faces = Vec::with_capacity(2 * cols * (nv - 1));
    for j in 0..nv - 1 {
        for i in 0..cols {
            let a = j * nu + i;
            let b = j * nu + (i + 1) % nu;
            let c = (j + 1) * nu + (i + 1) % nu;
            let d = (j + 1) * nu + i;
            // alternate the diagonal to avoid a directional bias
            if (i + j) % 2 == 0 {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            } else {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            }
        }
    }
    faces
}

/// Rectangle [0, length] × [0, width] in the plane z = 0.
pub fn flat_strip(length: f64, width: f64, nx: usize, ny: usize) -> TriMesh {
    let mut verts = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            verts.push(point3(length * i as f64 / nx as f64, width * j as f64 / ny as f64, 0.0));
        }
    }
    TriMesh::new(3, verts, grid_faces(nx + 1, ny + 1, false)).expect("strip is a valid mesh")
}

/// Two unit squares crossing each other along a segment of the x-axis.
pub fn crossed_rectangles() -> TriMesh {
    let verts = vec![
        point3(-1.0, -1.0, 0.0),
        point3(1.0, -1.0, 0.0),
        point3(1.0, 1.0, 0.0),
        point3(-1.0, 1.0, 0.0),
        point3(-0.5, 0.0, -1.0),
        point3(0.5, 0.0, -1.0),
        point3(0.5, 0.0, 1.0),
        point3(-0.5, 0.0, 1.0),
    ];
    let faces = vec![[0, 1, 2], [0, 2, 3], [4, 5, 6], [4, 6, 7]];
    TriMesh::new(3, verts, faces).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_topology() {
        for rings in [1, 2, 5, 18] {
            let d = flat_disk(rings, 1.0);
            assert_eq!(d.face_count(), 6 * rings * rings);
            assert_eq!(d.euler_characteristic(), 1);
            assert_eq!(d.boundary_loops().len(), 1);
            assert_eq!(d.boundary_loops()[0].len(), 6 * rings);
        }
    }

    #[test]
    fn grid_topology() {
        let f = grid_faces(5, 4, false);
        let verts: Vec<Point> = (0..20).map(|k| point3((k % 5) as f64, (k / 5) as f64, 0.0)).collect();
        let m = TriMesh::new(3, verts, f).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        // periodic grid on a cylinder is an annulus
        let verts: Vec<Point> = (0..20)
            .map(|k| {
                let a = TAU * (k % 5) as f64 / 5.0;
                point3(a.cos(), a.sin(), (k / 5) as f64)
            })
            .collect();
        let m = TriMesh::new(3, verts, grid_faces(5, 4, true)).unwrap();
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.boundary_loops().len(), 2);
    }
}

use std::f64::consts::TAU;

use nalgebra::Matrix2;

use crate::linalg::{SkylineCholesky, SymmetricBuilder};
use crate::mesh::generate::join_rings;
use crate::mesh::{point3, Point, TriMesh};

use super::PlateauError;

const LOCATOR_CELLS: usize = 64;

/// Concentric-ring triangulation of the closed unit disk with its flat
/// cotangent Laplacian.
///
/// Vertex 0 is the center and ring `j` (radius `j/n_rings`) holds `n_boundary`
/// vertices, so interior vertices come first and the outermost ring, the
/// boundary, is last. Alternate rings are rotated by half a step, which keeps
/// every triangle acute and every weight nonnegative.
#[derive(Debug, Clone)]
pub struct DiskMesh {
    n_boundary: usize,
    n_rings: usize,
    flat: TriMesh,
    weights: Vec<((usize, usize), f64)>,
    factor: SkylineCholesky,
    /// Inverse of the flat edge frame `[p1 − p0, p2 − p0]` per face.
    frames: Vec<Matrix2<f64>>,
    locator: Vec<Vec<usize>>,
}

impl DiskMesh {
    pub fn n_boundary(&self) -> usize {
        self.n_boundary
    }

    pub fn n_rings(&self) -> usize {
        self.n_rings
    }

    pub fn n_interior(&self) -> usize {
        self.flat.vertex_count() - self.n_boundary
    }

    pub fn vertex_count(&self) -> usize {
        self.flat.vertex_count()
    }

    /// Boundary vertex indices in counter-clockwise order from angle 0.
    pub fn boundary(&self) -> std::ops::Range<usize> {
        self.n_interior()..self.vertex_count()
    }

    pub fn flat(&self) -> &TriMesh {
        &self.flat
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        self.flat.faces()
    }

    /// Cotangent weights keyed by sorted edge.
    pub fn weights(&self) -> &[((usize, usize), f64)] {
        &self.weights
    }

    /// Parameter-plane position of vertex `v`.
    pub fn coords(&self, v: usize) -> [f64; 2] {
        let p = self.flat.vertices()[v];
        [p.x, p.y]
    }

    pub fn laplacian(&self) -> SymmetricBuilder {
        let mut b = SymmetricBuilder::new(self.vertex_count());
        for &((i, j), w) in &self.weights {
            b.add(i, i, w);
            b.add(j, j, w);
            b.add(i, j, -w);
        }
        b
    }

    /// The map's per-face derivative `(F_x, F_y)` in the flat frame.
    pub fn face_derivative(&self, f: usize, positions: &[Point]) -> (Point, Point) {
        let [a, b, c] = self.faces()[f];
        let e1 = positions[b] - positions[a];
        let e2 = positions[c] - positions[a];
        let m = &self.frames[f];
        (e1 * m[(0, 0)] + e2 * m[(1, 0)], e1 * m[(0, 1)] + e2 * m[(1, 1)])
    }

    /// Face containing the parameter point and its barycentric coordinates.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, [f64; 3])> {
        let cell = |v: f64| (((v + 1.0) / 2.0 * LOCATOR_CELLS as f64).floor() as isize).clamp(0, LOCATOR_CELLS as isize - 1) as usize;
        let tol = -1e-12;
        for &f in &self.locator[cell(y) * LOCATOR_CELLS + cell(x)] {
            let pa = self.coords(self.faces()[f][0]);
            let m = &self.frames[f];
            let (dx, dy) = (x - pa[0], y - pa[1]);
            let l1 = m[(0, 0)] * dx + m[(0, 1)] * dy;
            let l2 = m[(1, 0)] * dx + m[(1, 1)] * dy;
            let l0 = 1.0 - l1 - l2;
            if l0 >= tol && l1 >= tol && l2 >= tol {
                return Some((f, [l0, l1, l2]));
            }
        }
        None
    }

    /// Interpolate per-vertex values at a parameter point.
    pub fn interpolate(&self, positions: &[Point], x: f64, y: f64) -> Option<Point> {
        let (f, l) = self.locate(x, y)?;
        let [a, b, c] = self.faces()[f];
        Some(positions[a] * l[0] + positions[b] * l[1] + positions[c] * l[2])
    }

    /// Solve `L_II u_I = −L_IB u_B` for one coordinate, returning the full
    /// vector and the relative residual.
    pub(crate) fn extend_scalar(&self, boundary: &[f64]) -> (Vec<f64>, f64) {
        let ni = self.n_interior();
        let mut rhs = vec![0.0; ni];
        for &((i, j), w) in &self.weights {
            if i < ni && j >= ni {
                rhs[i] += w * boundary[j - ni];
            }
        }
        let mut u = self.factor.solve(&rhs);
        let mut res = self.interior_residual(&u, boundary);
        // one step of iterative refinement if roundoff is visible
        let scale = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        if res > 1e-12 * scale {
            let r = self.interior_residual_vec(&u, boundary);
            let du = self.factor.solve(&r);
            for (x, d) in u.iter_mut().zip(du) {
                *x += d;
            }
            res = self.interior_residual(&u, boundary);
        }
        u.extend_from_slice(boundary);
        (u, res / scale)
    }

    fn interior_residual_vec(&self, interior: &[f64], boundary: &[f64]) -> Vec<f64> {
        let ni = self.n_interior();
        let val = |v: usize| if v < ni { interior[v] } else { boundary[v - ni] };
        let mut r = vec![0.0; ni];
        for &((i, j), w) in &self.weights {
            let d = w * (val(j) - val(i));
            if i < ni {
                r[i] += d;
            }
            if j < ni {
                r[j] -= d;
            }
        }
        r
    }

    fn interior_residual(&self, interior: &[f64], boundary: &[f64]) -> f64 {
        self.interior_residual_vec(interior, boundary)
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Concentric-ring disk with `n_boundary` vertices on each of `n_rings` rings.
pub fn build_disk(n_boundary: usize, n_rings: usize) -> Result<DiskMesh, PlateauError> {
    if n_boundary < 12 || n_rings < 2 {
        return Err(PlateauError::InvalidDisk(format!(
            "need n_boundary >= 12 and n_rings >= 2, got ({n_boundary}, {n_rings})"
        )));
    }
    let n = n_boundary;
    // the boundary ring has phase 0; rings alternate inward
    let phase = |j: usize| if (n_rings - j) % 2 == 1 { 0.5 / n as f64 } else { 0.0 };
    let mut verts = vec![point3(0.0, 0.0, 0.0)];
    for j in 1..=n_rings {
        let r = j as f64 / n_rings as f64;
        for i in 0..n {
            let a = TAU * (i as f64 / n as f64 + phase(j));
            verts.push(point3(r * a.cos(), r * a.sin(), 0.0));
        }
    }
    let ring = |j: usize| -> Vec<usize> { (0..n).map(|i| 1 + (j - 1) * n + i).collect() };
    let first = ring(1);
    let mut faces: Vec<[usize; 3]> = (0..n).map(|i| [0, first[i], first[(i + 1) % n]]).collect();
    for j in 2..=n_rings {
        faces.extend(join_rings(&ring(j - 1), phase(j - 1), &ring(j), phase(j)));
    }
    let flat = TriMesh::new(3, verts, faces)?;
    let weights = flat.cotan_weights();
    if let Some(&((i, j), w)) = weights.iter().find(|&&(_, w)| w < 0.0) {
        return Err(PlateauError::InvalidDisk(format!(
            "{n_rings} rings of {n_boundary} vertices give an obtuse pair at edge ({i}, {j}) with weight {w:.3e}; \
             use at most about n_boundary/pi rings"
        )));
    }

    let ni = flat.vertex_count() - n;
    let mut lii = SymmetricBuilder::new(ni);
    for &((i, j), w) in &weights {
        if i < ni {
            lii.add(i, i, w);
        }
        if j < ni {
            lii.add(j, j, w);
        }
        if i < ni && j < ni {
            lii.add(i, j, -w);
        }
    }
    let factor = lii.factor()?;

    let frames = flat
        .faces()
        .iter()
        .map(|&[a, b, c]| {
            let p = |v: usize| flat.vertices()[v];
            let (e1, e2) = (p(b) - p(a), p(c) - p(a));
            Matrix2::new(e1.x, e2.x, e1.y, e2.y)
                .try_inverse()
                .expect("ring triangles are nondegenerate")
        })
        .collect();

    let mut locator = vec![Vec::new(); LOCATOR_CELLS * LOCATOR_CELLS];
    let cell = |v: f64| (((v + 1.0) / 2.0 * LOCATOR_CELLS as f64).floor() as isize).clamp(0, LOCATOR_CELLS as isize - 1) as usize;
    for (f, tri) in flat.faces().iter().enumerate() {
        let xs = tri.map(|v| flat.vertices()[v].x);
        let ys = tri.map(|v| flat.vertices()[v].y);
        let lo = |a: [f64; 3]| a.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = |a: [f64; 3]| a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for cy in cell(lo(ys))..=cell(hi(ys)) {
            for cx in cell(lo(xs))..=cell(hi(xs)) {
                locator[cy * LOCATOR_CELLS + cx].push(f);
            }
        }
    }

    Ok(DiskMesh {
        n_boundary,
        n_rings,
        flat,
        weights,
        factor,
        frames,
        locator,
    })
}

//! Self-intersection test for triangle meshes in R³.
//!
//! Broad phase sorts face bounding boxes along x and sweeps; the narrow phase
//! is a separating-axis test. Pairs of faces that share a vertex are skipped.

use nalgebra::Vector3;
use rayon::prelude::*;

use super::measure::to3;
use super::{MeshError, TriMesh};

/// The lowest-indexed intersecting pair of non-adjacent faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelfIntersection {
    pub faces: (usize, usize),
}

type Tri = [Vector3<f64>; 3];

/// Separating-axis test. Intervals overlapping by no more than `eps` count as
/// separated, so triangles that merely touch are not reported.
pub fn triangles_intersect(t: &Tri, s: &Tri, eps: f64) -> bool {
    let e = [t[1] - t[0], t[2] - t[1], t[0] - t[2]];
    let f = [s[1] - s[0], s[2] - s[1], s[0] - s[2]];
    let nt = e[0].cross(&e[1]);
    let ns = f[0].cross(&f[1]);
    let mut axes: Vec<Vector3<f64>> = Vec::with_capacity(17);
    axes.push(nt);
    axes.push(ns);
    for a in &e {
        for b in &f {
            axes.push(a.cross(b));
        }
    }
    for a in &e {
        axes.push(nt.cross(a));
    }
    for b in &f {
        axes.push(ns.cross(b));
    }
    for axis in axes {
        let len = axis.norm();
        if len < 1e-300 {
            continue;
        }
        let u = axis / len;
        let (tmin, tmax) = project(t, &u);
        let (smin, smax) = project(s, &u);
        if tmax <= smin + eps || smax <= tmin + eps {
            return false;
        }
    }
    true
}

fn project(t: &Tri, u: &Vector3<f64>) -> (f64, f64) {
    let a = t[0].dot(u);
    let b = t[1].dot(u);
    let c = t[2].dot(u);
    (a.min(b).min(c), a.max(b).max(c))
}

/// First witness (by face index order) of two non-adjacent faces that cross.
pub fn intersects_self(mesh: &TriMesh) -> Result<Option<SelfIntersection>, MeshError> {
    mesh.require_dim("self-intersection test", 3)?;
    let tris: Vec<Tri> = mesh
        .faces()
        .iter()
        .map(|f| [to3(&mesh.vertices()[f[0]]), to3(&mesh.vertices()[f[1]]), to3(&mesh.vertices()[f[2]])])
        .collect();
    let eps = 1e-12 * mesh.bounding_scale().max(1e-300);
    let boxes: Vec<(Vector3<f64>, Vector3<f64>)> = tris
        .iter()
        .map(|t| (t[0].inf(&t[1]).inf(&t[2]), t[0].sup(&t[1]).sup(&t[2])))
        .collect();
    let mut order: Vec<usize> = (0..tris.len()).collect();
    order.sort_by(|&a, &b| boxes[a].0.x.partial_cmp(&boxes[b].0.x).unwrap().then(a.cmp(&b)));

    let mut candidates = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if boxes[j].0.x > boxes[i].1.x + eps {
                break;
            }
            let overlap = (0..3).all(|d| boxes[i].0[d] <= boxes[j].1[d] + eps && boxes[j].0[d] <= boxes[i].1[d] + eps);
            if !overlap {
                continue;
            }
            let (fi, fj) = (mesh.faces()[i], mesh.faces()[j]);
            if fi.iter().any(|v| fj.contains(v)) {
                continue;
            }
            candidates.push((i.min(j), i.max(j)));
        }
    }
    let hit = candidates
        .par_iter()
        .filter(|(i, j)| triangles_intersect(&tris[*i], &tris[*j], eps))
        .min()
        .copied();
    Ok(hit.map(|faces| SelfIntersection { faces }))
}

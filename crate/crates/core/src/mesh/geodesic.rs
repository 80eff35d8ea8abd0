//! Intrinsic distance by fast marching.
//!
//! Vertices are accepted in order of distance as in Dijkstra's algorithm, but
//! a vertex is also updated across each triangle whose other two corners are
//! known. The triangle update is a planar wavefront with unit gradient. From
//! a single source the front diverges, and a virtual source unfolded into the
//! triangle's plane is also tried; it is exact on flat pieces. It is not used
//! for several sources, where fronts may converge and it would undershoot.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::TriMesh;

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distance at `C` from known distances at `A` and `B`, given the side
/// lengths `a = |BC|`, `b = |AC|`, `c = |AB|`.
fn triangle_update(da: f64, db: f64, a: f64, b: f64, c: f64, point_source: bool) -> f64 {
    let mut best = (da + b).min(db + a);
    if c <= 0.0 {
        return best;
    }
    let xc = (b * b + c * c - a * a) / (2.0 * c);
    let yc2 = b * b - xc * xc;
    if yc2 <= 0.0 {
        return best;
    }
    let yc = yc2.sqrt();

    // virtual point source on the far side of AB
    let xs = (da * da + c * c - db * db) / (2.0 * c);
    let ys2 = da * da - xs * xs;
    if point_source && ys2 >= 0.0 {
        let ys = -ys2.sqrt();
        let t = -ys / (yc - ys);
        let x = xs + t * (xc - xs);
        if (0.0..=c).contains(&x) {
            best = best.min(((xc - xs).powi(2) + (yc - ys).powi(2)).sqrt());
        }
    }

    // planar front: the linear interpolant has unit gradient
    let gx = (db - da) / c;
    if gx.abs() < 1.0 {
        let gy = (1.0 - gx * gx).sqrt();
        let x = xc - gx * yc / gy;
        if (0.0..=c).contains(&x) {
            best = best.min(da + gx * xc + gy * yc);
        }
    }
    best.max(da.max(db))
}

impl TriMesh {
    /// Approximate intrinsic distance from a set of source vertices;
    /// unreachable vertices get ∞.
    pub fn fast_marching(&self, sources: &[usize]) -> Vec<f64> {
        let n = self.vertices.len();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (f, tri) in self.faces.iter().enumerate() {
            for &v in tri {
                incident[v].push(f);
            }
        }
        let len = |i: usize, j: usize| (self.vertices[i] - self.vertices[j]).norm();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        let point_source = sources.len() == 1;
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Entry(0.0, s));
        }
        while let Some(Entry(d, v)) = heap.pop() {
            if done[v] || d > dist[v] {
                continue;
            }
            done[v] = true;
            for &f in &incident[v] {
                let tri = self.faces[f];
                let k = tri.iter().position(|&x| x == v).unwrap();
                for step in [1, 2] {
                    let w = tri[(k + step) % 3];
                    if done[w] {
                        continue;
                    }
                    let other = tri[(k + 3 - step) % 3];
                    let mut cand = dist[v] + len(v, w);
                    if done[other] {
                        cand = cand.min(triangle_update(dist[v], dist[other], len(other, w), len(v, w), len(v, other), point_source));
                    }
                    if cand < dist[w] {
                        dist[w] = cand;
                        heap.push(Entry(cand, w));
                    }
                }
            }
        }
        dist
    }

    /// Fast-marching distance from every vertex to the boundary.
    pub fn fast_marching_to_boundary(&self) -> Vec<f64> {
        let flags = self.boundary_flags();
        let sources: Vec<usize> = (0..flags.len()).filter(|&v| flags[v]).collect();
        self.fast_marching(&sources)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::super::generate::{flat_disk, hemisphere};

    #[test]
    fn flat_distances_are_nearly_euclidean() {
        let d = flat_disk(20, 1.0);
        let dist = d.fast_marching(&[0]);
        let graph = d.geodesic_distance(0).unwrap();
        let mut worst: f64 = 0.0;
        let mut worst_graph: f64 = 0.0;
        for (v, p) in d.vertices().iter().enumerate().skip(1) {
            worst = worst.max((dist[v] - p.norm()).abs() / p.norm());
            worst_graph = worst_graph.max((graph[v] - p.norm()).abs() / p.norm());
        }
        assert!(worst < 0.01, "{worst}");
        assert!(worst < worst_graph);
        let to_b = d.fast_marching_to_boundary();
        for (v, p) in d.vertices().iter().enumerate() {
            assert!((to_b[v] - (1.0 - p.norm())).abs() < 0.02, "{v}: {} vs {}", to_b[v], 1.0 - p.norm());
        }
    }

    #[test]
    fn hemisphere_pole_to_equator() {
        let h = hemisphere(24, 1.0);
        let dist = h.fast_marching(&[0]);
        let flags = h.boundary_flags();
        for v in (0..h.vertex_count()).filter(|&v| flags[v]) {
            assert!((dist[v] - FRAC_PI_2).abs() < 0.01 * FRAC_PI_2);
        }
    }
}

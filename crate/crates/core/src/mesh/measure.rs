use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;

use nalgebra::Vector3;

use super::{triangle_area, MeshError, Point, TriMesh};

/// Per-vertex angle defects and their totals.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleDefects {
    /// Interior vertices: 2π − Σ angles. Boundary vertices: π − Σ angles.
    pub per_vertex: Vec<f64>,
    pub is_boundary: Vec<bool>,
    /// −Σ interior defects, i.e. −∫K dS.
    pub total_curvature: f64,
    /// Σ interior defects.
    pub interior_sum: f64,
    /// Σ boundary defects (discrete geodesic turning of the boundary).
    pub boundary_turning: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn angle_between(u: &Point, v: &Point) -> f64 {
    let uu = u.dot(u);
    let vv = v.dot(v);
    let uv = u.dot(v);
    let cross = (uu * vv - uv * uv).max(0.0).sqrt();
    cross.atan2(uv)
}

fn cot_between(u: &Point, v: &Point) -> f64 {
    let uu = u.dot(u);
    let vv = v.dot(v);
    let uv = u.dot(v);
    uv / (uu * vv - uv * uv).max(0.0).sqrt()
}

pub(crate) fn to3(p: &Point) -> Vector3<f64> {
    Vector3::new(p.x, p.y, p.z)
}

impl TriMesh {
    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        triangle_area(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    /// Total area; empty meshes have area 0.
    pub fn area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Interior angles of face `f` at its three corners.
    pub fn corner_angles(&self, f: usize) -> [f64; 3] {
        let idx = self.faces[f];
        let p = |k: usize| self.vertices[idx[k % 3]];
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let a = p(k);
            *o = angle_between(&(p(k + 1) - a), &(p(k + 2) - a));
        }
        out
    }

    pub fn angle_defects(&self) -> AngleDefects {
        let n = self.vertices.len();
        let mut sum = vec![0.0; n];
        let mut used = vec![false; n];
        for f in 0..self.faces.len() {
            let ang = self.corner_angles(f);
            for k in 0..3 {
                sum[self.faces[f][k]] += ang[k];
                used[self.faces[f][k]] = true;
            }
        }
        let is_boundary = self.boundary_flags();
        let mut per_vertex = vec![0.0; n];
        let mut interior_sum = 0.0;
        let mut boundary_turning = 0.0;
        for v in 0..n {
            if !used[v] {
                continue;
            }
            if is_boundary[v] {
                per_vertex[v] = PI - sum[v];
                boundary_turning += per_vertex[v];
            } else {
                per_vertex[v] = 2.0 * PI - sum[v];
                interior_sum += per_vertex[v];
            }
        }
        AngleDefects {
            per_vertex,
            is_boundary,
            total_curvature: -interior_sum,
            interior_sum,
            boundary_turning,
        }
    }

    /// Barycentric (lumped) vertex areas: one third of each incident face.
    pub fn vertex_areas(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.vertices.len()];
        for f in 0..self.faces.len() {
            let a = self.face_area(f) / 3.0;
            for &v in &self.faces[f] {
                m[v] += a;
            }
        }
        m
    }

    /// Cotangent weights `w_ij = ½ Σ cot(opposite angles)` keyed by sorted edge.
    pub fn cotan_weights(&self) -> Vec<((usize, usize), f64)> {
        let mut w: HashMap<(usize, usize), f64> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let o = self.vertices[f[k]];
                let a = f[(k + 1) % 3];
                let b = f[(k + 2) % 3];
                let c = cot_between(&(self.vertices[a] - o), &(self.vertices[b] - o));
                *w.entry((a.min(b), a.max(b))).or_insert(0.0) += 0.5 * c;
            }
        }
        let mut out: Vec<_> = w.into_iter().collect();
        out.sort_by_key(|e| e.0);
        out
    }

    /// Unit face normals (R³ only).
    pub fn face_normals(&self) -> Result<Vec<Vector3<f64>>, MeshError> {
        self.require_dim("face normals", 3)?;
        Ok(self
            .faces
            .iter()
            .map(|f| {
                let a = to3(&self.vertices[f[0]]);
                let n = (to3(&self.vertices[f[1]]) - a).cross(&(to3(&self.vertices[f[2]]) - a));
                n.normalize()
            })
            .collect())
    }

    /// Area-weighted vertex normals (R³ only).
    pub fn vertex_normals(&self) -> Result<Vec<Vector3<f64>>, MeshError> {
        self.require_dim("vertex normals", 3)?;
        let mut n = vec![Vector3::zeros(); self.vertices.len()];
        for f in &self.faces {
            let a = to3(&self.vertices[f[0]]);
            let c = (to3(&self.vertices[f[1]]) - a).cross(&(to3(&self.vertices[f[2]]) - a));
            for &v in f {
                n[v] += c;
            }
        }
        Ok(n.into_iter()
            .map(|v| if v.norm() > 0.0 { v.normalize() } else { v })
            .collect())
    }

    /// Integrated mean-curvature vectors: the cotangent Laplacian of the
    /// position, projected onto the vertex normal (R³ only).
    ///
    /// The projection removes the in-surface conormal part that the cotangent
    /// Laplacian picks up at boundary vertices.
    pub fn mean_curvature_vectors(&self) -> Result<Vec<Vector3<f64>>, MeshError> {
        let normals = self.vertex_normals()?;
        let mut lap = vec![Vector3::zeros(); self.vertices.len()];
        for ((a, b), w) in self.cotan_weights() {
            let d = to3(&self.vertices[b]) - to3(&self.vertices[a]);
            lap[a] += d * w;
            lap[b] -= d * w;
        }
        Ok(lap
            .into_iter()
            .zip(normals)
            .map(|(l, n)| n * n.dot(&l))
            .collect())
    }

    /// Edge-graph shortest-path distance from `source`; unreachable vertices get ∞.
    pub fn geodesic_distance(&self, source: usize) -> Result<Vec<f64>, MeshError> {
        if source >= self.vertices.len() {
            return Err(MeshError::VertexOutOfRange(source));
        }
        Ok(self.geodesic_distance_from(&[source]))
    }

    /// Multi-source edge-graph distance.
    pub fn geodesic_distance_from(&self, sources: &[usize]) -> Vec<f64> {
        let adj = self.neighbors();
        let mut dist = vec![f64::INFINITY; self.vertices.len()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(HeapEntry { dist: 0.0, vertex: s });
        }
        while let Some(HeapEntry { dist: d, vertex: v }) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &u in &adj[v] {
                let nd = d + (self.vertices[u] - self.vertices[v]).norm();
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(HeapEntry { dist: nd, vertex: u });
                }
            }
        }
        dist
    }

    /// Edge-graph distance from every vertex to the boundary.
    pub fn distance_to_boundary(&self) -> Vec<f64> {
        let flags = self.boundary_flags();
        let sources: Vec<usize> = (0..flags.len()).filter(|&v| flags[v]).collect();
        self.geodesic_distance_from(&sources)
    }

    /// Sum of boundary edge lengths.
    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges()
            .iter()
            .map(|&(a, b)| (self.vertices[a] - self.vertices[b]).norm())
            .sum()
    }
}

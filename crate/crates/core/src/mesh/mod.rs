//! Triangle meshes in R³ and R⁴.
//!
//! Vertices are stored as 4-vectors; three-dimensional meshes keep the last
//! coordinate at zero. Faces are oriented consistently, and boundary loops are
//! derived from the edges used by exactly one face.

mod ball;
pub mod generate;
mod geodesic;
mod hull;
mod intersect;
pub mod io;
mod measure;
mod polyline;

use std::collections::{BTreeMap, HashMap};

use nalgebra::Vector4;
use thiserror::Error;

pub use ball::{ball_area, ball_area_subdivided, triangle_ball_area};
pub use hull::{convex_hull_violation, ConvexHull};
pub use intersect::{intersects_self, triangles_intersect, SelfIntersection};
pub use measure::AngleDefects;
pub use polyline::{polyline_total_curvature, Polyline};

pub type Point = Vector4<f64>;

pub fn point3(x: f64, y: f64, z: f64) -> Point {
    Vector4::new(x, y, z, 0.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("face {face} references vertex {index} but the mesh has {count} vertices")]
    InvalidIndex { face: usize, index: usize, count: usize },
    #[error("face {face} is degenerate (area {area:e})")]
    DegenerateFace { face: usize, area: f64 },
    #[error("edge ({a}, {b}) is used twice in the same direction; orientation is inconsistent")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("edge ({a}, {b}) is shared by more than two faces")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("{op} requires a mesh in R^{expected}, got R^{got}")]
    Dimension { op: &'static str, expected: usize, got: usize },
    #[error("unsupported ambient dimension {0}; meshes live in R^3 or R^4")]
    UnsupportedDimension(usize),
    #[error("mesh has no boundary")]
    NoBoundary,
    #[error("OBJ supports n=3 only")]
    ObjDimension,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("attribute `{name}` has {got} values for {expected} vertices")]
    AttributeLength { name: String, expected: usize, got: usize },
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("polyline needs at least {needed} points, got {got}")]
    ShortPolyline { needed: usize, got: usize },
    #[error("consecutive polyline points {0} and {1} coincide")]
    RepeatedPoint(usize, usize),
}

/// Indexed triangle mesh with optional per-vertex scalar attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    dim: usize,
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    attributes: BTreeMap<String, Vec<f64>>,
}

impl TriMesh {
    /// Build and validate a mesh.
    pub fn new(dim: usize, vertices: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if dim != 3 && dim != 4 {
            return Err(MeshError::UnsupportedDimension(dim));
        }
        let mesh = Self {
            dim,
            vertices,
            faces,
            attributes: BTreeMap::new(),
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            vertices: Vec::new(),
            faces: Vec::new(),
            attributes: BTreeMap::new(),
        }
    }

    fn validate(&self) -> Result<(), MeshError> {
        let n = self.vertices.len();
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                if v >= n {
                    return Err(MeshError::InvalidIndex { face: fi, index: v, count: n });
                }
            }
        }
        let scale = self.bounding_scale();
        let floor = 1e-14 * scale * scale;
        for fi in 0..self.faces.len() {
            let a = self.face_area(fi);
            if !(a > floor) {
                return Err(MeshError::DegenerateFace { face: fi, area: a });
            }
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let e = directed.entry((a, b)).or_insert(0);
                *e += 1;
                if *e > 1 {
                    return Err(MeshError::InconsistentOrientation { a, b });
                }
            }
        }
        let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
        for &(a, b) in directed.keys() {
            *undirected.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        if let Some((&(a, b), _)) = undirected.iter().find(|(_, &c)| c > 2) {
            return Err(MeshError::NonManifoldEdge { a, b });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn attributes(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.attributes
    }

    pub fn attribute(&self, name: &str) -> Option<&[f64]> {
        self.attributes.get(name).map(|v| v.as_slice())
    }

    pub fn set_attribute(&mut self, name: &str, values: Vec<f64>) -> Result<(), MeshError> {
        if values.len() != self.vertices.len() {
            return Err(MeshError::AttributeLength {
                name: name.to_string(),
                expected: self.vertices.len(),
                got: values.len(),
            });
        }
        self.attributes.insert(name.to_string(), values);
        Ok(())
    }

    /// Largest side of the axis-aligned bounding box.
    pub fn bounding_scale(&self) -> f64 {
        if self.vertices.is_empty() {
            return 0.0;
        }
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (hi - lo).max()
    }

    /// Apply `f` to every vertex position, keeping connectivity and attributes.
    pub fn map_vertices<F: Fn(&Point) -> Point>(&self, f: F) -> TriMesh {
        TriMesh {
            dim: self.dim,
            vertices: self.vertices.iter().map(f).collect(),
            faces: self.faces.clone(),
            attributes: self.attributes.clone(),
        }
    }

    /// Vertex displacement `v + t·field(v)`, used for first-variation estimates.
    pub fn displaced(&self, field: &[Point], t: f64) -> TriMesh {
        TriMesh {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .zip(field)
                .map(|(v, x)| v + x * t)
                .collect(),
            faces: self.faces.clone(),
            attributes: BTreeMap::new(),
        }
    }

    /// The sub-mesh made of the selected faces, re-indexed; attributes are carried over.
    pub fn sub_mesh(&self, keep: impl Fn(usize, &[usize; 3]) -> bool) -> TriMesh {
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let mut order = Vec::new();
        let mut faces = Vec::new();
        for (fi, f) in self.faces.iter().enumerate() {
            if !keep(fi, f) {
                continue;
            }
            let mut nf = [0; 3];
            for (k, &v) in f.iter().enumerate() {
                if map[v] == usize::MAX {
                    map[v] = vertices.len();
                    vertices.push(self.vertices[v]);
                    order.push(v);
                }
                nf[k] = map[v];
            }
            faces.push(nf);
        }
        let attributes = self
            .attributes
            .iter()
            .map(|(k, vals)| (k.clone(), order.iter().map(|&v| vals[v]).collect()))
            .collect();
        TriMesh {
            dim: self.dim,
            vertices,
            faces,
            attributes,
        }
    }

    /// Concatenate two meshes of the same dimension (vertices are not merged).
    pub fn disjoint_union(&self, other: &TriMesh) -> TriMesh {
        let off = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
        TriMesh {
            dim: self.dim.max(other.dim),
            vertices,
            faces,
            attributes: BTreeMap::new(),
        }
    }

    /// Unique undirected edges, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| (0..3).map(move |k| (f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3]))))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Directed boundary edges (oriented as in their single face), sorted.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut count: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let e = count.entry((a.min(b), a.max(b))).or_insert((0, (a, b)));
                e.0 += 1;
            }
        }
        let mut out: Vec<(usize, usize)> = count
            .into_values()
            .filter(|(c, _)| *c == 1)
            .map(|(_, d)| d)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn boundary_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for (a, b) in self.boundary_edges() {
            flags[a] = true;
            flags[b] = true;
        }
        flags
    }

    /// Ordered boundary loops following face orientation. Each loop starts at
    /// its smallest vertex index; loops are sorted by that index.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        let edges = self.boundary_edges();
        let mut next: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(a, b) in &edges {
            next.entry(a).or_default().push(b);
        }
        let mut used: HashMap<(usize, usize), bool> = HashMap::new();
        let mut loops = Vec::new();
        for &(a0, b0) in &edges {
            if used.contains_key(&(a0, b0)) {
                continue;
            }
            let mut lp = vec![a0];
            used.insert((a0, b0), true);
            let mut cur = b0;
            while cur != a0 {
                lp.push(cur);
                let nb = next
                    .get(&cur)
                    .and_then(|c| c.iter().copied().find(|&n| !used.contains_key(&(cur, n))));
                match nb {
                    Some(n) => {
                        used.insert((cur, n), true);
                        cur = n;
                    }
                    None => break,
                }
            }
            let min_pos = lp.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i).unwrap();
            lp.rotate_left(min_pos);
            loops.push(lp);
        }
        loops.sort_by_key(|l| l[0]);
        loops
    }

    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for f in &self.faces {
            for &v in f {
                used[v] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        v - self.edges().len() as i64 + self.faces.len() as i64
    }

    /// Vertex adjacency lists (sorted).
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (a, b) in self.edges() {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }

    /// Closed boundary polylines.
    pub fn boundary_polylines(&self) -> Vec<Polyline> {
        self.boundary_loops()
            .into_iter()
            .map(|l| Polyline {
                dim: self.dim,
                points: l.iter().map(|&v| self.vertices[v]).collect(),
                closed: true,
            })
            .collect()
    }

    pub(crate) fn require_dim(&self, op: &'static str, expected: usize) -> Result<(), MeshError> {
        if self.dim != expected {
            return Err(MeshError::Dimension {
                op,
                expected,
                got: self.dim,
            });
        }
        Ok(())
    }
}

/// Area of the triangle (a, b, c) in any dimension, via the Gram determinant.
pub fn triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    let u = b - a;
    let v = c - a;
    let uu = u.dot(&u);
    let vv = v.dot(&v);
    let uv = u.dot(&v);
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> TriMesh {
        let v = vec![
            point3(0.0, 0.0, 0.0),
            point3(1.0, 0.0, 0.0),
            point3(1.0, 1.0, 0.0),
            point3(0.0, 1.0, 0.0),
        ];
        TriMesh::new(3, v, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn boundary_loop_of_square() {
        let m = square();
        assert_eq!(m.boundary_loops(), vec![vec![0, 1, 2, 3]]);
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.edges().len(), 5);
    }

    #[test]
    fn validation_errors() {
        let v = vec![point3(0.0, 0.0, 0.0), point3(1.0, 0.0, 0.0), point3(0.0, 1.0, 0.0)];
        assert!(matches!(
            TriMesh::new(3, v.clone(), vec![[0, 1, 3]]),
            Err(MeshError::InvalidIndex { .. })
        ));
        let line = vec![point3(0.0, 0.0, 0.0), point3(1.0, 0.0, 0.0), point3(2.0, 0.0, 0.0)];
        assert!(matches!(
            TriMesh::new(3, line, vec![[0, 1, 2]]),
            Err(MeshError::DegenerateFace { .. })
        ));
        let mut v4 = v.clone();
        v4.push(point3(1.0, 1.0, 0.0));
        assert!(matches!(
            TriMesh::new(3, v4, vec![[0, 1, 2], [0, 1, 3]]),
            Err(MeshError::InconsistentOrientation { .. })
        ));
        assert!(matches!(TriMesh::new(2, v, vec![]), Err(MeshError::UnsupportedDimension(2))));
    }

    #[test]
    fn sub_mesh_reindexes() {
        let m = square();
        let s = m.sub_mesh(|fi, _| fi == 1);
        assert_eq!(s.vertex_count(), 3);
        assert_eq!(s.faces(), &[[0, 1, 2]]);
    }
}

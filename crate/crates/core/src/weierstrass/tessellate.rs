use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::mesh::{Point, TriMesh};
use crate::quadrature::{GaussLegendre, GL_REL_TOL};

use super::domain::Shape;
use super::{
    build_path, circle_periods, conformal_factor, gauss_curvature, immerse0, integrate0, normal, phi0, rotate_re,
    DomainSpec, WeierstrassData, WeierstrassError,
};

const PERIOD_TOLERANCE: f64 = 1e-8;

/// Grid nodes of the parameter domain and their images.
#[derive(Debug, Clone)]
pub struct ParameterGrid {
    pub domain: DomainSpec,
    pub nodes: Vec<Complex64>,
    pub positions: Vec<Vector3<f64>>,
}

/// Reject domains on which `F` would be multivalued.
fn check_periods(data: &WeierstrassData) -> Result<(), WeierstrassError> {
    let punctures = data.punctures();
    let mut loops: Vec<(Complex64, f64)> = Vec::new();
    if let Shape::Annulus { r0, r1 } = data.domain.shape {
        let mut r = (r0 * r1).sqrt();
        while punctures.iter().any(|p| (p.norm() - r).abs() < 1e-6 * r) {
            r *= 1.01;
        }
        loops.push((Complex64::new(0.0, 0.0), r));
    }
    for (k, p) in punctures.iter().enumerate() {
        if !data.domain.contains(*p) {
            continue;
        }
        let nearest = punctures
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, q)| (p - q).norm())
            .fold(1.0, f64::min);
        loops.push((*p, 0.5 * nearest));
    }
    for (center, radius) in loops {
        let per = circle_periods(data, center, radius)?;
        if per.norm() > PERIOD_TOLERANCE * (1.0 + radius) {
            return Err(WeierstrassError::NonZeroPeriod(per.x, per.y, per.z, center));
        }
    }
    Ok(())
}

/// Integrate `φ` along the domain's spanning tree of grid edges.
///
/// Each tree edge is an independent integral, so edges are computed in
/// parallel and summed afterwards in tree order; the result does not depend
/// on scheduling.
pub fn parameter_grid(data: &WeierstrassData) -> Result<ParameterGrid, WeierstrassError> {
    check_periods(data)?;
    let nodes = data.domain.nodes();
    let punctures = data.punctures();
    let (root, edges) = data.domain.tree();
    let root_val = immerse0(data, nodes[root])?;
    let increments: Vec<[Complex64; 3]> = edges
        .par_iter()
        .map(|&(a, b)| {
            let path = build_path(nodes[a], nodes[b], &punctures)?;
            integrate0(data, &path)
        })
        .collect::<Result<_, _>>()?;
    let mut acc = vec![[Complex64::new(0.0, 0.0); 3]; nodes.len()];
    acc[root] = root_val;
    for (&(a, b), inc) in edges.iter().zip(&increments) {
        for k in 0..3 {
            acc[b][k] = acc[a][k] + inc[k];
        }
    }
    let rot = data.rotation();
    Ok(ParameterGrid {
        domain: data.domain.clone(),
        positions: acc.iter().map(|v| rotate_re(rot, v)).collect(),
        nodes,
    })
}

/// Triangle mesh of the grid image, with per-vertex attributes `lambda`,
/// `K`, `normal_x`, `normal_y`, `normal_z`, `z_re`, `z_im`.
pub fn tessellate(data: &WeierstrassData) -> Result<TriMesh, WeierstrassError> {
    let grid = parameter_grid(data)?;
    grid.mesh(data)
}

impl ParameterGrid {
    pub fn mesh(&self, data: &WeierstrassData) -> Result<TriMesh, WeierstrassError> {
        let verts: Vec<Point> = self.positions.iter().map(|p| Point::new(p.x, p.y, p.z, 0.0)).collect();
        let mut mesh = TriMesh::new(3, verts, self.domain.faces())?;
        let per_node: Vec<(f64, f64, Vector3<f64>)> = self
            .nodes
            .par_iter()
            .map(|&z| {
                let lam = conformal_factor(data, z)?;
                let k = match gauss_curvature(data, z) {
                    // K blows up at a branch point; record the value on a small circle
                    Err(WeierstrassError::BranchPoint(_)) => {
                        let r = 1e-3 * z.norm().max(1.0);
                        let mut acc = 0.0;
                        for j in 0..8 {
                            let w = z + Complex64::from_polar(r, (j as f64 + 0.37) * std::f64::consts::TAU / 8.0);
                            acc += gauss_curvature(data, w)? / 8.0;
                        }
                        acc
                    }
                    other => other?,
                };
                Ok((lam, k, normal(data, z)?))
            })
            .collect::<Result<_, WeierstrassError>>()?;
        let col = |f: &dyn Fn(&(f64, f64, Vector3<f64>)) -> f64| per_node.iter().map(f).collect::<Vec<f64>>();
        mesh.set_attribute("lambda", col(&|t| t.0))?;
        mesh.set_attribute("K", col(&|t| t.1))?;
        mesh.set_attribute("normal_x", col(&|t| t.2.x))?;
        mesh.set_attribute("normal_y", col(&|t| t.2.y))?;
        mesh.set_attribute("normal_z", col(&|t| t.2.z))?;
        mesh.set_attribute("z_re", self.nodes.iter().map(|z| z.re).collect())?;
        mesh.set_attribute("z_im", self.nodes.iter().map(|z| z.im).collect())?;
        Ok(mesh)
    }

    /// Length of the image of each straight parameter edge, `∫ |dF/dt| dt`.
    ///
    /// This is the length the pullback metric assigns to the edge, so it is
    /// the same for every member of an associate family; chord lengths are not.
    pub fn edge_lengths(&self, data: &WeierstrassData, edges: &[(usize, usize)]) -> Result<Vec<f64>, WeierstrassError> {
        let rot = data.rotation();
        let rule = GaussLegendre::standard();
        edges
            .par_iter()
            .map(|&(a, b)| {
                let (za, zb) = (self.nodes[a], self.nodes[b]);
                let speed = |t: f64| match phi0(data, za + (zb - za) * t) {
                    Ok(v) => rotate_re(rot, &[v[0] * (zb - za), v[1] * (zb - za), v[2] * (zb - za)]).norm(),
                    Err(_) => f64::NAN,
                };
                Ok(rule.integrate_adaptive(0.0, 1.0, speed, GL_REL_TOL)?)
            })
            .collect()
    }

    fn rectangle(&self) -> Result<(usize, usize, f64, f64), WeierstrassError> {
        match self.domain.shape {
            Shape::Rectangle { x, y } => {
                let (nu, nv) = self.domain.resolution;
                Ok((nu, nv, (x[1] - x[0]) / (nu - 1) as f64, (y[1] - y[0]) / (nv - 1) as f64))
            }
            _ => Err(WeierstrassError::InvalidDomain(
                "grid residuals are defined on rectangle domains".into(),
            )),
        }
    }

    /// Largest per-cell conformality defect `max(| |F_x|² − |F_y|² |, 2|F_x·F_y|) / λ²`,
    /// with derivatives from centered differences across each cell.
    pub fn conformality_residual(&self, data: &WeierstrassData) -> Result<f64, WeierstrassError> {
        let (nu, nv, hx, hy) = self.rectangle()?;
        let p = |i: usize, j: usize| self.positions[j * nu + i];
        let mut worst: f64 = 0.0;
        for j in 0..nv - 1 {
            for i in 0..nu - 1 {
                let fx = (p(i + 1, j) - p(i, j) + p(i + 1, j + 1) - p(i, j + 1)) / (2.0 * hx);
                let fy = (p(i, j + 1) - p(i, j) + p(i + 1, j + 1) - p(i + 1, j)) / (2.0 * hy);
                let center = (self.nodes[j * nu + i] + self.nodes[(j + 1) * nu + i + 1]) / 2.0;
                let lam = conformal_factor(data, center)?;
                let a = (fx.norm_squared() - fy.norm_squared()).abs();
                let b = 2.0 * fx.dot(&fy).abs();
                worst = worst.max(a.max(b) / (lam * lam));
            }
        }
        Ok(worst)
    }

    /// Largest five-point Laplacian of `F` at interior nodes, relative to the
    /// largest `λ²` on the grid.
    pub fn harmonicity_residual(&self, data: &WeierstrassData) -> Result<f64, WeierstrassError> {
        let (nu, nv, hx, hy) = self.rectangle()?;
        let p = |i: usize, j: usize| self.positions[j * nu + i];
        let mut worst: f64 = 0.0;
        let mut lam_max: f64 = 0.0;
        for j in 1..nv - 1 {
            for i in 1..nu - 1 {
                let lap = (p(i + 1, j) - 2.0 * p(i, j) + p(i - 1, j)) / (hx * hx)
                    + (p(i, j + 1) - 2.0 * p(i, j) + p(i, j - 1)) / (hy * hy);
                worst = worst.max(lap.norm());
                lam_max = lam_max.max(conformal_factor(data, self.nodes[j * nu + i])?);
            }
        }
        Ok(worst / (lam_max * lam_max).max(f64::MIN_POSITIVE))
    }
}

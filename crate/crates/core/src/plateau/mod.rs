//! Disk-type Plateau problem by the direct method.
//!
//! The unknowns are the curve parameters `s` at which the boundary vertices of
//! a fixed disk triangulation sit. For each `s` the interior is the discrete
//! harmonic extension, and the Dirichlet energy of that extension is minimized
//! over cyclically monotone `s` with three entries pinned.

mod courant;
mod curve;
mod disk;
mod solve;

use serde::Deserialize;
use thiserror::Error;

use crate::expr::ExprError;
use crate::linalg::LinalgError;
use crate::mesh::{triangle_area, MeshError, Point, Polyline, TriMesh};

pub use courant::{courant_lebesgue_check, CourantLebesgueReport, CL_RADII};
pub use curve::BoundaryCurve;
pub use disk::{build_disk, DiskMesh};
pub use solve::{solve, PlateauConfig, PlateauState, RunSummary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlateauError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("interior Laplacian is singular: {0}")]
    Singular(#[from] LinalgError),
    #[error("boundary must be a single closed curve")]
    NotSingleCurve,
    #[error("boundary curve intersects itself near segments {0} and {1}")]
    SelfIntersecting(usize, usize),
    #[error("harmonic extension residual {0:e} exceeds 1e-10")]
    Residual(f64),
    #[error("invalid disk mesh: {0}")]
    InvalidDisk(String),
    #[error("invalid anchors: {0}")]
    Anchors(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid problem file: {0}")]
    Json(String),
}

/// A Jordan curve with three anchor parameters, pinned at boundary vertices
/// `0`, `⌊N/3⌋` and `⌊2N/3⌋` in that order.
#[derive(Debug, Clone)]
pub struct BoundaryProblem {
    pub curve: BoundaryCurve,
    pub anchors: [f64; 3],
}

impl BoundaryProblem {
    pub fn new(curve: BoundaryCurve, anchors: [f64; 3]) -> Result<Self, PlateauError> {
        let p = Self { curve, anchors };
        p.unwrapped_anchors()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.curve.dim()
    }

    /// Anchors lifted to `a₀ < a₁ < a₂ < a₀ + T`.
    pub(crate) fn unwrapped_anchors(&self) -> Result<[f64; 3], PlateauError> {
        let t = self.curve.period();
        let [a0, a1, a2] = self.anchors;
        if !self.anchors.iter().all(|a| a.is_finite()) {
            return Err(PlateauError::Anchors("anchors must be finite".into()));
        }
        let d1 = (a1 - a0).rem_euclid(t);
        let d2 = (a2 - a0).rem_euclid(t);
        let tiny = 1e-12 * t;
        if d1 < tiny || d2 < tiny || (d2 - d1).abs() < tiny {
            return Err(PlateauError::Anchors(format!("anchors {:?} are not distinct", self.anchors)));
        }
        if d2 < d1 {
            return Err(PlateauError::Anchors(format!(
                "anchors {:?} must increase cyclically along the curve",
                self.anchors
            )));
        }
        Ok([a0, a0 + d1, a0 + d2])
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    curve: CurveFile,
    anchors: [f64; 3],
    n_boundary: usize,
    n_rings: usize,
    tol: Option<f64>,
    max_iters: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CurveFile {
    Points(PointsFile),
    Parametric(ParametricFile),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointsFile {
    points: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParametricFile {
    x: String,
    y: String,
    z: String,
    w: Option<String>,
    period: f64,
}

/// A problem file: the boundary problem, the disk resolution, and solver
/// settings that override the defaults.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub problem: BoundaryProblem,
    pub n_boundary: usize,
    pub n_rings: usize,
    pub config: PlateauConfig,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, PlateauError> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| PlateauError::Json(e.to_string()))?;
        let curve = match file.curve {
            CurveFile::Points(p) => {
                let dim = p.points.first().map_or(3, |q| q.len());
                if !(3..=4).contains(&dim) || p.points.iter().any(|q| q.len() != dim) {
                    return Err(PlateauError::InvalidProblem(
                        "curve points must all have 3 or all have 4 coordinates".into(),
                    ));
                }
                let pts = p
                    .points
                    .iter()
                    .map(|q| Point::new(q[0], q[1], q[2], q.get(3).copied().unwrap_or(0.0)))
                    .collect();
                BoundaryCurve::polyline(Polyline::new(dim, pts, true)?)?
            }
            CurveFile::Parametric(p) => {
                let mut comps = vec![p.x.as_str(), p.y.as_str(), p.z.as_str()];
                if let Some(w) = &p.w {
                    comps.push(w);
                }
                BoundaryCurve::parametric(&comps, p.period)?
            }
        };
        let mut config = PlateauConfig::default();
        if let Some(t) = file.tol {
            config.tol = t;
        }
        if let Some(m) = file.max_iters {
            config.max_iters = m;
        }
        Ok(Self {
            problem: BoundaryProblem::new(curve, file.anchors)?,
            n_boundary: file.n_boundary,
            n_rings: file.n_rings,
            config,
        })
    }
}

/// Interior values of the discrete harmonic map with the given boundary
/// values, one coordinate at a time.
pub fn harmonic_extend(disk: &DiskMesh, boundary: &[Point]) -> Result<Vec<Point>, PlateauError> {
    if boundary.len() != disk.n_boundary() {
        return Err(PlateauError::InvalidProblem(format!(
            "expected {} boundary values, got {}",
            disk.n_boundary(),
            boundary.len()
        )));
    }
    if boundary.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(PlateauError::NonFinite("boundary values".into()));
    }
    let mut out = vec![Point::zeros(); disk.vertex_count()];
    for c in 0..4 {
        let vals: Vec<f64> = boundary.iter().map(|p| p[c]).collect();
        if vals.iter().all(|&v| v == 0.0) {
            continue;
        }
        let (u, res) = disk.extend_scalar(&vals);
        if res > 1e-10 {
            return Err(PlateauError::Residual(res));
        }
        for (o, v) in out.iter_mut().zip(u) {
            o[c] = v;
        }
    }
    Ok(out)
}

/// `E = ½ Σ w_ij |F_i − F_j|²`.
pub fn energy(disk: &DiskMesh, positions: &[Point]) -> f64 {
    0.5 * disk
        .weights()
        .iter()
        .map(|&((i, j), w)| w * (positions[i] - positions[j]).norm_squared())
        .sum::<f64>()
}

/// Area of the image of the piecewise-linear map.
pub fn map_area(disk: &DiskMesh, positions: &[Point]) -> f64 {
    disk.faces()
        .iter()
        .map(|&[a, b, c]| triangle_area(&positions[a], &positions[b], &positions[c]))
        .sum()
}

/// Per face, `(|F_x|² − |F_y|², 2 F_x·F_y)`.
pub fn conformality_residual(disk: &DiskMesh, positions: &[Point]) -> Vec<(f64, f64)> {
    (0..disk.faces().len())
        .map(|f| {
            let (fx, fy) = disk.face_derivative(f, positions);
            (fx.norm_squared() - fy.norm_squared(), 2.0 * fx.dot(&fy))
        })
        .collect()
}

/// The image mesh of a map on the disk, in the map's ambient dimension.
pub fn image_mesh(disk: &DiskMesh, positions: &[Point], dim: usize) -> Result<TriMesh, PlateauError> {
    Ok(TriMesh::new(dim, positions.to_vec(), disk.faces().to_vec())?)
}

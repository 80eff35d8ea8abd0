use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expr::SpecialPoint;
use crate::mesh::generate::grid_faces;

use super::WeierstrassError;

/// Minimum distance between a grid node and a puncture.
pub const NODE_CLEARANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `[x0, x1] × [y0, y1]`
    Rectangle { x: [f64; 2], y: [f64; 2] },
    /// `r0 < |z| < r1`, sampled on a log-radial grid.
    Annulus { r0: f64, r1: f64 },
    /// `|z| < radius`, sampled on a polar grid with a center vertex.
    Disk { radius: f64 },
}

/// Parameter domain, its punctures, and grid resolution.
///
/// `resolution = (nu, nv)`: rectangle nodes per side in x and y; for the
/// annulus and disk, nodes per circle and number of circles.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub shape: Shape,
    pub punctures: Vec<SpecialPoint>,
    pub resolution: (usize, usize),
}

impl DomainSpec {
    pub fn rectangle(x: [f64; 2], y: [f64; 2], nu: usize, nv: usize) -> Self {
        Self::plain(Shape::Rectangle { x, y }, nu, nv)
    }

    pub fn annulus(r0: f64, r1: f64, nu: usize, nv: usize) -> Self {
        Self::plain(Shape::Annulus { r0, r1 }, nu, nv)
    }

    pub fn disk(radius: f64, nu: usize, nv: usize) -> Self {
        Self::plain(Shape::Disk { radius }, nu, nv)
    }

    fn plain(shape: Shape, nu: usize, nv: usize) -> Self {
        Self {
            shape,
            punctures: Vec::new(),
            resolution: (nu, nv),
        }
    }

    pub fn with_punctures(mut self, punctures: Vec<SpecialPoint>) -> Self {
        self.punctures = punctures;
        self
    }

    pub fn with_resolution(mut self, nu: usize, nv: usize) -> Self {
        self.resolution = (nu, nv);
        self
    }

    pub fn puncture_locations(&self) -> Vec<Complex64> {
        self.punctures.iter().map(|p| p.location).collect()
    }

    pub fn validate(&self) -> Result<(), WeierstrassError> {
        let bad = |m: &str| Err(WeierstrassError::InvalidDomain(m.to_string()));
        let (nu, nv) = self.resolution;
        match self.shape {
            Shape::Rectangle { x, y } => {
                if !(x[0] < x[1] && y[0] < y[1]) {
                    return bad("rectangle needs x0 < x1 and y0 < y1");
                }
                if nu < 2 || nv < 2 {
                    return bad("rectangle resolution must be at least 2 × 2");
                }
            }
            Shape::Annulus { r0, r1 } => {
                if !(0.0 < r0 && r0 < r1) {
                    return bad("annulus needs 0 < r0 < r1");
                }
                if nu < 3 || nv < 2 {
                    return bad("annulus resolution must be at least 3 × 2");
                }
            }
            Shape::Disk { radius } => {
                if !(radius > 0.0) {
                    return bad("disk radius must be positive");
                }
                if nu < 3 || nv < 1 {
                    return bad("disk resolution must be at least 3 × 1");
                }
            }
        }
        for (i, p) in self.punctures.iter().enumerate() {
            if !self.encloses(p.location) {
                return bad(&format!("puncture {} lies outside the domain", p.location));
            }
            if self.punctures[..i].iter().any(|q| q.location == p.location) {
                return bad(&format!("puncture {} is declared twice", p.location));
            }
        }
        Ok(())
    }

    /// Inside the outer boundary (the annulus hole counts as enclosed).
    pub fn encloses(&self, z: Complex64) -> bool {
        match self.shape {
            Shape::Rectangle { x, y } => x[0] < z.re && z.re < x[1] && y[0] < z.im && z.im < y[1],
            Shape::Annulus { r1, .. } => z.norm() < r1,
            Shape::Disk { radius } => z.norm() < radius,
        }
    }

    /// Inside the domain proper.
    pub fn contains(&self, z: Complex64) -> bool {
        match self.shape {
            Shape::Annulus { r0, r1 } => r0 < z.norm() && z.norm() < r1,
            _ => self.encloses(z),
        }
    }

    /// Grid nodes, pushed off punctures by at least [`NODE_CLEARANCE`].
    pub fn nodes(&self) -> Vec<Complex64> {
        let (nu, nv) = self.resolution;
        let mut nodes = Vec::new();
        match self.shape {
            Shape::Rectangle { x, y } => {
                for j in 0..nv {
                    for i in 0..nu {
                        let re = x[0] + (x[1] - x[0]) * i as f64 / (nu - 1) as f64;
                        let im = y[0] + (y[1] - y[0]) * j as f64 / (nv - 1) as f64;
                        nodes.push(Complex64::new(re, im));
                    }
                }
            }
            Shape::Annulus { r0, r1 } => {
                for j in 0..nv {
                    let r = r0 * (r1 / r0).powf(j as f64 / (nv - 1) as f64);
                    for i in 0..nu {
                        nodes.push(Complex64::from_polar(r, TAU * i as f64 / nu as f64));
                    }
                }
            }
            Shape::Disk { radius } => {
                nodes.push(Complex64::new(0.0, 0.0));
                for j in 1..=nv {
                    let r = radius * j as f64 / nv as f64;
                    for i in 0..nu {
                        nodes.push(Complex64::from_polar(r, TAU * i as f64 / nu as f64));
                    }
                }
            }
        }
        let punctures = self.puncture_locations();
        for z in &mut nodes {
            for p in &punctures {
                let d = *z - p;
                if d.norm() < NODE_CLEARANCE {
                    let dir = if d.norm() > 0.0 { d / d.norm() } else { Complex64::from_polar(1.0, 0.37) };
                    *z = p + dir * (2.0 * NODE_CLEARANCE);
                }
            }
        }
        nodes
    }

    /// Counter-clockwise (in the z-plane) triangles over [`Self::nodes`].
    pub fn faces(&self) -> Vec<[usize; 3]> {
        let (nu, nv) = self.resolution;
        let flip = |f: [usize; 3]| [f[0], f[2], f[1]];
        match self.shape {
            Shape::Rectangle { .. } => grid_faces(nu, nv, false),
            Shape::Annulus { .. } => grid_faces(nu, nv, true).into_iter().map(flip).collect(),
            Shape::Disk { .. } => {
                let mut faces: Vec<[usize; 3]> = (0..nu).map(|i| [0, 1 + i, 1 + (i + 1) % nu]).collect();
                if nv > 1 {
                    faces.extend(
                        grid_faces(nu, nv, true)
                            .into_iter()
                            .map(|f| flip([f[0] + 1, f[1] + 1, f[2] + 1])),
                    );
                }
                faces
            }
        }
    }

    /// Spanning tree of the grid as `(root, edges)`; every edge `(parent,
    /// child)` appears after the edge that reaches `parent`. The tree never
    /// crosses the annulus seam, so it is well defined on the slit annulus.
    pub(crate) fn tree(&self) -> (usize, Vec<(usize, usize)>) {
        let (nu, nv) = self.resolution;
        let mut edges = Vec::new();
        match self.shape {
            Shape::Rectangle { .. } => {
                for i in 0..nu - 1 {
                    edges.push((i, i + 1));
                }
                for i in 0..nu {
                    for j in 0..nv - 1 {
                        edges.push((j * nu + i, (j + 1) * nu + i));
                    }
                }
                (0, edges)
            }
            Shape::Annulus { .. } => {
                for j in 0..nv - 1 {
                    edges.push((j * nu, (j + 1) * nu));
                }
                for j in 0..nv {
                    for i in 0..nu - 1 {
                        edges.push((j * nu + i, j * nu + i + 1));
                    }
                }
                (0, edges)
            }
            Shape::Disk { .. } => {
                edges.push((0, 1));
                for j in 1..nv {
                    edges.push((1 + (j - 1) * nu, 1 + j * nu));
                }
                for j in 0..nv {
                    for i in 0..nu - 1 {
                        edges.push((1 + j * nu + i, 1 + j * nu + i + 1));
                    }
                }
                (0, edges)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub(crate) struct DomainJson {
    shape: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    resolution: [usize; 2],
}

impl DomainJson {
    pub(crate) fn from_spec(d: &DomainSpec) -> Self {
        let mut j = DomainJson {
            shape: String::new(),
            x: None,
            y: None,
            r0: None,
            r1: None,
            radius: None,
            resolution: [d.resolution.0, d.resolution.1],
        };
        match d.shape {
            Shape::Rectangle { x, y } => {
                j.shape = "rectangle".into();
                j.x = Some(x);
                j.y = Some(y);
            }
            Shape::Annulus { r0, r1 } => {
                j.shape = "annulus".into();
                j.r0 = Some(r0);
                j.r1 = Some(r1);
            }
            Shape::Disk { radius } => {
                j.shape = "disk".into();
                j.radius = Some(radius);
            }
        }
        j
    }

    pub(crate) fn into_spec(self, punctures: Vec<SpecialPoint>) -> Result<DomainSpec, WeierstrassError> {
        let bad = |m: String| WeierstrassError::InvalidDomain(m);
        let [nu, nv] = self.resolution;
        let extra = |names: &[(&str, bool)]| -> Result<(), WeierstrassError> {
            match names.iter().find(|(_, present)| *present) {
                Some((n, _)) => Err(bad(format!("field `{n}` does not apply to shape `{}`", self.shape))),
                None => Ok(()),
            }
        };
        let shape = match self.shape.as_str() {
            "rectangle" => {
                extra(&[("r0", self.r0.is_some()), ("r1", self.r1.is_some()), ("radius", self.radius.is_some())])?;
                Shape::Rectangle {
                    x: self.x.ok_or_else(|| bad("rectangle needs `x`".into()))?,
                    y: self.y.ok_or_else(|| bad("rectangle needs `y`".into()))?,
                }
            }
            "annulus" => {
                extra(&[("x", self.x.is_some()), ("y", self.y.is_some()), ("radius", self.radius.is_some())])?;
                Shape::Annulus {
                    r0: self.r0.ok_or_else(|| bad("annulus needs `r0`".into()))?,
                    r1: self.r1.ok_or_else(|| bad("annulus needs `r1`".into()))?,
                }
            }
            "disk" => {
                extra(&[
                    ("x", self.x.is_some()),
                    ("y", self.y.is_some()),
                    ("r0", self.r0.is_some()),
                    ("r1", self.r1.is_some()),
                ])?;
                Shape::Disk {
                    radius: self.radius.ok_or_else(|| bad("disk needs `radius`".into()))?,
                }
            }
            other => return Err(bad(format!("unknown shape `{other}` (expected rectangle, annulus, or disk)"))),
        };
        let spec = DomainSpec {
            shape,
            punctures,
            resolution: (nu, nv),
        };
        spec.validate()?;
        Ok(spec)
    }
}

//! Minimal immersions from Weierstrass data.
//!
//! The data are a meromorphic Gauss map `g` and the third component `φ₃` of
//! the holomorphic null curve `φ = (½(1/g − g)φ₃, (i/2)(1/g + g)φ₃, φ₃)`,
//! optionally rotated by `e^{iθ}` to move along the associate family. The
//! immersion is `F(z) = Re ∫ φ dz` from a base point, integrated along a
//! puncture-avoiding path.
//!
//! All integrals are computed at θ = 0 and rotated afterwards, so members of
//! an associate family share their quadrature exactly.

mod catalog;
mod domain;
mod fit;
mod path;
mod tessellate;

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{ComplexExpr, ExprError, PointKind, SpecialPoint};
use crate::mesh::MeshError;
use crate::quadrature::{integrate_path, integrate_segment, PathSegment, QuadError};

pub use catalog::{catalog, catenoid, enneper, helicoid, holomorphic_curve, plane_disk, CatalogEntry};
pub use domain::{DomainSpec, Shape, NODE_CLEARANCE};
pub use fit::{fit_vertical_catenoid, CatenoidFit};
pub use path::build_path;
pub use tessellate::{parameter_grid, tessellate, ParameterGrid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeierstrassError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("pole hit at {0}")]
    PoleHit(Complex64),
    #[error("{0} is a branch point (conformal factor vanishes)")]
    BranchPoint(Complex64),
    #[error("cannot build a path from {from} to {to}: {reason}")]
    PathConstruction { from: Complex64, to: Complex64, reason: String },
    #[error("inadmissible data at {at}: phi3 has order {k} < |ord g| = {m}, so F has a pole")]
    Inadmissible { at: Complex64, k: i32, m: i32 },
    #[error("{0} is a puncture; it is excluded from the surface")]
    PunctureExcluded(Complex64),
    #[error("g is identically {0}; the image is a horizontal plane, use the plane_disk catalog entry")]
    DegenerateGaussMap(String),
    #[error("loop is not closed: last point {last} differs from first point {first}")]
    OpenLoop { first: Complex64, last: Complex64 },
    #[error("loop passes through puncture {0}")]
    LoopHitsPuncture(Complex64),
    #[error("base point {0} is a puncture")]
    BaseAtPuncture(Complex64),
    #[error("nonzero real period ({0:.3e}, {1:.3e}, {2:.3e}) around {3}; the immersion is not single-valued on this domain")]
    NonZeroPeriod(f64, f64, f64, Complex64),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("unknown catalog entry `{0}` (expected catenoid, helicoid, enneper, plane_disk, or holomorphic_curve(n))")]
    UnknownCatalog(String),
    #[error("invalid data file: {0}")]
    Json(String),
}

/// Weierstrass data over a parameter domain.
#[derive(Debug, Clone, PartialEq)]
pub struct WeierstrassData {
    pub g: ComplexExpr,
    pub phi3: ComplexExpr,
    pub domain: DomainSpec,
    pub base_point: Complex64,
    /// associate-family angle in radians
    pub theta: f64,
    /// declared zeros and poles, checked for admissibility on construction
    pub special_points: Vec<SpecialPoint>,
}

/// Everything the closed-form operations give at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImmersionSample {
    pub z: Complex64,
    pub position: Vector3<f64>,
    pub lambda: f64,
    pub k: f64,
    pub normal: Vector3<f64>,
}

/// Local behaviour of `F` at a declared special point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchClass {
    Immersed,
    BranchOrder(u32),
}

impl WeierstrassData {
    pub fn new(g: ComplexExpr, phi3: ComplexExpr, domain: DomainSpec, base_point: Complex64) -> Result<Self, WeierstrassError> {
        Self {
            g,
            phi3,
            domain,
            base_point,
            theta: 0.0,
            special_points: Vec::new(),
        }
        .validated()
    }

    /// Parse `g` and `φ₃` from text.
    pub fn from_strings(g: &str, phi3: &str, domain: DomainSpec, base_point: Complex64) -> Result<Self, WeierstrassError> {
        Self::new(ComplexExpr::parse(g)?, ComplexExpr::parse(phi3)?, domain, base_point)
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_domain(self, domain: DomainSpec) -> Result<Self, WeierstrassError> {
        Self { domain, ..self }.validated()
    }

    pub fn with_special_points(self, special_points: Vec<SpecialPoint>) -> Result<Self, WeierstrassError> {
        Self { special_points, ..self }.validated()
    }

    fn validated(self) -> Result<Self, WeierstrassError> {
        self.domain.validate()?;
        if self.g.is_constant() {
            let c = self.g.eval(Complex64::new(0.0, 0.0));
            match c {
                Ok(v) if v == Complex64::new(0.0, 0.0) => return Err(WeierstrassError::DegenerateGaussMap("0".into())),
                Ok(v) if !v.is_finite() => return Err(WeierstrassError::DegenerateGaussMap("infinite".into())),
                Err(_) => return Err(WeierstrassError::DegenerateGaussMap("infinite".into())),
                _ => {}
            }
        }
        if self.domain.punctures.iter().any(|p| p.location == self.base_point) {
            return Err(WeierstrassError::BaseAtPuncture(self.base_point));
        }
        for (i, p) in self.special_points.iter().enumerate() {
            if self.special_points[..i].iter().any(|q| q.location == p.location) {
                return Err(WeierstrassError::InvalidDomain(format!("special point {} declared twice", p.location)));
            }
            match classify_branch(&self, p) {
                Ok(_) | Err(WeierstrassError::PunctureExcluded(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(self)
    }

    pub fn punctures(&self) -> Vec<Complex64> {
        self.domain.puncture_locations()
    }

    fn is_puncture(&self, z: Complex64) -> bool {
        self.domain.punctures.iter().any(|p| p.location == z)
    }

    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    pub fn from_json(text: &str) -> Result<Self, WeierstrassError> {
        let file: DataFile = serde_json::from_str(text).map_err(|e| WeierstrassError::Json(e.to_string()))?;
        let punctures = file
            .punctures
            .iter()
            .map(|p| SpecialPoint::new(Complex64::new(p[0], p[1]), PointKind::Unknown))
            .collect();
        let domain = file.domain.into_spec(punctures)?;
        let special = file
            .special
            .iter()
            .map(|s| SpecialPoint::new(Complex64::new(s.at[0], s.at[1]), s.kind))
            .collect();
        Self::from_strings(&file.g, &file.phi3, domain, Complex64::new(file.base[0], file.base[1]))?
            .with_theta(file.theta)
            .with_special_points(special)
    }

    pub fn to_json(&self) -> String {
        let file = DataFile {
            g: self.g.source().to_string(),
            phi3: self.phi3.source().to_string(),
            domain: domain::DomainJson::from_spec(&self.domain),
            punctures: self.punctures().iter().map(|p| [p.re, p.im]).collect(),
            base: [self.base_point.re, self.base_point.im],
            theta: self.theta,
            special: self
                .special_points
                .iter()
                .map(|s| SpecialJson {
                    at: [s.location.re, s.location.im],
                    kind: s.kind,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("data serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataFile {
    g: String,
    phi3: String,
    domain: domain::DomainJson,
    #[serde(default)]
    punctures: Vec<[f64; 2]>,
    base: [f64; 2],
    #[serde(default)]
    theta: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    special: Vec<SpecialJson>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecialJson {
    at: [f64; 2],
    #[serde(default)]
    kind: PointKind,
}

fn finite3(v: &[Complex64; 3]) -> bool {
    v.iter().all(|c| c.is_finite())
}

fn phi_direct(data: &WeierstrassData, z: Complex64) -> Result<[Complex64; 3], ExprError> {
    let g = data.g.eval(z)?;
    let f3 = data.phi3.eval(z)?;
    let pole = || ExprError::PoleHit { at: z.to_string() };
    if g == Complex64::new(0.0, 0.0) {
        return Err(pole());
    }
    let ginv = g.inv();
    let v = [0.5 * (ginv - g) * f3, I * 0.5 * (ginv + g) * f3, f3];
    if finite3(&v) {
        Ok(v)
    } else {
        Err(pole())
    }
}

/// Evaluate a function that is holomorphic near `z` except possibly for a
/// removable singularity at `z` itself.
///
/// Falls back to circle means at two radii: the mean of a holomorphic
/// function over a circle is its center value, and for a removable point the
/// spread around the mean shrinks with the radius, whereas for a pole it grows.
fn removable<const N: usize, F>(f: F, z: Complex64) -> Result<[Complex64; N], ExprError>
where
    F: Fn(Complex64) -> Result<[Complex64; N], ExprError>,
{
    if let Ok(v) = f(z) {
        if v.iter().all(|c| c.is_finite()) {
            return Ok(v);
        }
    }
    let circle = |r: f64| -> Result<([Complex64; N], [f64; N]), ExprError> {
        const M: usize = 8;
        let mut vals = Vec::with_capacity(M);
        for k in 0..M {
            let w = z + Complex64::from_polar(r, (k as f64 + 0.37) * TAU / M as f64);
            let v = f(w)?;
            if !v.iter().all(|c| c.is_finite()) {
                return Err(ExprError::PoleHit { at: z.to_string() });
            }
            vals.push(v);
        }
        let mut mean = [Complex64::new(0.0, 0.0); N];
        for v in &vals {
            for c in 0..N {
                mean[c] += v[c] / M as f64;
            }
        }
        let mut spread = [0.0; N];
        for v in &vals {
            for c in 0..N {
                spread[c] = f64::max(spread[c], (v[c] - mean[c]).norm());
            }
        }
        Ok((mean, spread))
    };
    let r1 = 1e-4 * z.norm().max(1.0);
    let (m1, s1) = circle(r1)?;
    let (m2, s2) = circle(2.0 * r1)?;
    for c in 0..N {
        let floor = 1e-9 * (1.0 + m2[c].norm());
        if s1[c] > 0.75 * s2[c] + floor || (m1[c] - m2[c]).norm() > 1e-6 * (1.0 + m2[c].norm()) {
            return Err(ExprError::PoleHit { at: z.to_string() });
        }
    }
    Ok(m1)
}

/// `φ` at θ = 0, evaluated through removable singularities (e.g. zeros of `g`
/// matched by zeros of `φ₃`).
pub(crate) fn phi0(data: &WeierstrassData, z: Complex64) -> Result<[Complex64; 3], ExprError> {
    removable(|w| phi_direct(data, w), z)
}

/// `(φ₁, φ₂, φ₃)·e^{iθ}`.
pub fn phi(data: &WeierstrassData, z: Complex64) -> Result<[Complex64; 3], WeierstrassError> {
    if data.is_puncture(z) {
        return Err(WeierstrassError::PoleHit(z));
    }
    let rot = data.rotation();
    let v = phi0(data, z).map_err(|_| WeierstrassError::PoleHit(z))?;
    Ok([v[0] * rot, v[1] * rot, v[2] * rot])
}

/// `∫ φ dz` at θ = 0 along a path.
pub(crate) fn integrate0(data: &WeierstrassData, path: &[PathSegment]) -> Result<[Complex64; 3], WeierstrassError> {
    Ok(integrate_path(path, &|w| phi0(data, w))?)
}

pub(crate) fn rotate_re(rot: Complex64, v: &[Complex64; 3]) -> Vector3<f64> {
    Vector3::new((rot * v[0]).re, (rot * v[1]).re, (rot * v[2]).re)
}

/// `∫ φ dz` at θ = 0 from the base point to `z`.
pub(crate) fn immerse0(data: &WeierstrassData, z: Complex64) -> Result<[Complex64; 3], WeierstrassError> {
    let path = build_path(data.base_point, z, &data.punctures())?;
    integrate0(data, &path)
}

/// `F(z) = Re ∫_{base}^{z} φ dz` along the path from [`build_path`].
pub fn immerse(data: &WeierstrassData, z: Complex64) -> Result<Vector3<f64>, WeierstrassError> {
    if data.is_puncture(z) {
        return Err(WeierstrassError::PunctureExcluded(z));
    }
    Ok(rotate_re(data.rotation(), &immerse0(data, z)?))
}

/// `F` integrated along a caller-supplied path starting at the base point.
pub fn immerse_along(data: &WeierstrassData, path: &[PathSegment]) -> Result<Vector3<f64>, WeierstrassError> {
    Ok(rotate_re(data.rotation(), &integrate0(data, path)?))
}

/// `λ = ((|g|⁻¹ + |g|)/2)·|φ₃|`; independent of θ.
pub fn conformal_factor(data: &WeierstrassData, z: Complex64) -> Result<f64, WeierstrassError> {
    if data.is_puncture(z) {
        return Err(WeierstrassError::PoleHit(z));
    }
    if let (Ok(g), Ok(f3)) = (data.g.eval(z), data.phi3.eval(z)) {
        let a = g.norm();
        let lam = 0.5 * (a.recip() + a) * f3.norm();
        if lam.is_finite() && a > 0.0 {
            return Ok(lam);
        }
    }
    // |φ|² = 2λ², and φ extends through removable points
    let v = phi0(data, z).map_err(|_| WeierstrassError::PoleHit(z))?;
    Ok(FRAC_1_SQRT_2 * v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
}

fn curvature_direct(data: &WeierstrassData, z: Complex64) -> Option<f64> {
    let g = data.g.eval(z).ok()?;
    let dg = data.g.eval_derivative(z).ok()?;
    let f3 = data.phi3.eval(z).ok()?;
    let a = g.norm();
    // symmetric under g -> 1/g; use whichever has modulus at most one
    let (q, dq) = if a <= 1.0 { (a, dg.norm()) } else { (a.recip(), dg.norm() / (a * a)) };
    let s = 4.0 * dq * q / (f3.norm() * (1.0 + q * q).powi(2));
    s.is_finite().then_some(-s * s)
}

/// Gauss curvature `K = −[4|g′| / (|φ₃ g|(|g|⁻¹ + |g|)²)]²`.
///
/// At isolated points where the closed form is 0/0 (zeros of `g` matched by
/// zeros of `φ₃`), the value is the mean over a tiny circle.
pub fn gauss_curvature(data: &WeierstrassData, z: Complex64) -> Result<f64, WeierstrassError> {
    let lam = conformal_factor(data, z)?;
    if lam <= 0.0 {
        return Err(WeierstrassError::BranchPoint(z));
    }
    if let Some(k) = curvature_direct(data, z) {
        return Ok(k);
    }
    let r = 1e-5 * z.norm().max(1.0);
    let mut acc = 0.0;
    for j in 0..8 {
        let w = z + Complex64::from_polar(r, (j as f64 + 0.37) * TAU / 8.0);
        acc += curvature_direct(data, w).ok_or(WeierstrassError::PoleHit(z))?;
    }
    Ok(acc / 8.0)
}

/// Curvature from the metric alone, `K = −Δ log λ / λ²`, by a five-point
/// stencil of width `h`. An independent check on [`gauss_curvature`].
pub fn gauss_curvature_from_metric(data: &WeierstrassData, z: Complex64, h: f64) -> Result<f64, WeierstrassError> {
    let ll = |w: Complex64| conformal_factor(data, w).map(f64::ln);
    let c = ll(z)?;
    let lap = (ll(z + h)? + ll(z - h)? + ll(z + I * h)? + ll(z - I * h)? - 4.0 * c) / (h * h);
    Ok(-lap / (2.0 * c).exp())
}

/// Unit normal from stereographic projection of `g`: `(2 Re g, 2 Im g, |g|² − 1)/(|g|² + 1)`.
pub fn normal(data: &WeierstrassData, z: Complex64) -> Result<Vector3<f64>, WeierstrassError> {
    let g = match data.g.eval(z) {
        Ok(v) if v.is_finite() => Some(v),
        _ => removable(|w| Ok([data.g.eval(w)?]), z).ok().map(|v| v[0]),
    };
    Ok(match g {
        None => Vector3::new(0.0, 0.0, 1.0),
        Some(g) if g.norm() <= 1.0 => {
            let d = g.norm_sqr() + 1.0;
            Vector3::new(2.0 * g.re / d, 2.0 * g.im / d, (g.norm_sqr() - 1.0) / d)
        }
        Some(g) => {
            let q = g.inv();
            let d = q.norm_sqr() + 1.0;
            Vector3::new(2.0 * q.re / d, -2.0 * q.im / d, (1.0 - q.norm_sqr()) / d)
        }
    })
}

pub fn sample(data: &WeierstrassData, z: Complex64) -> Result<ImmersionSample, WeierstrassError> {
    Ok(ImmersionSample {
        z,
        position: immerse(data, z)?,
        lambda: conformal_factor(data, z)?,
        k: gauss_curvature(data, z)?,
        normal: normal(data, z)?,
    })
}

/// Real periods `Re ∮ φ dz` around a closed polyline (last point equal to the first).
pub fn periods(data: &WeierstrassData, lp: &[Complex64]) -> Result<Vector3<f64>, WeierstrassError> {
    let (first, last) = match (lp.first(), lp.last()) {
        (Some(&f), Some(&l)) if lp.len() >= 3 => (f, l),
        (Some(&f), Some(&l)) => return Err(WeierstrassError::OpenLoop { first: f, last: l }),
        _ => {
            let zero = Complex64::new(0.0, 0.0);
            return Err(WeierstrassError::OpenLoop { first: zero, last: zero });
        }
    };
    let scale = lp.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if (first - last).norm() > 1e-12 * scale {
        return Err(WeierstrassError::OpenLoop { first, last });
    }
    let segments: Vec<PathSegment> = lp
        .windows(2)
        .filter(|w| w[0] != w[1])
        .map(|w| PathSegment::Line { from: w[0], to: w[1] })
        .collect();
    for p in data.punctures() {
        if segments.iter().any(|s| s.distance_to(p) <= 1e-9 * scale) {
            return Err(WeierstrassError::LoopHitsPuncture(p));
        }
    }
    immerse_along(data, &segments)
}

/// Periods around the circle `|z − center| = radius`, traversed counter-clockwise.
pub fn circle_periods(data: &WeierstrassData, center: Complex64, radius: f64) -> Result<Vector3<f64>, WeierstrassError> {
    let arcs: Vec<PathSegment> = (0..4)
        .map(|k| PathSegment::Arc {
            center,
            radius,
            start: k as f64 * TAU / 4.0,
            end: (k + 1) as f64 * TAU / 4.0,
        })
        .collect();
    for p in data.punctures() {
        if ((p - center).norm() - radius).abs() <= 1e-9 * radius {
            return Err(WeierstrassError::LoopHitsPuncture(p));
        }
    }
    let mut total = [Complex64::new(0.0, 0.0); 3];
    for a in &arcs {
        let part = integrate_segment(a, &|w| phi0(data, w))?;
        for k in 0..3 {
            total[k] += part[k];
        }
    }
    Ok(rotate_re(data.rotation(), &total))
}

/// The associate surface: `φ` multiplied by `e^{i·dtheta}`.
pub fn associate(data: &WeierstrassData, dtheta: f64) -> WeierstrassData {
    let mut out = data.clone();
    out.theta += dtheta;
    out
}

/// With `m = |ord_p g|` and `k = ord_p φ₃`, the conformal factor
/// `λ = ½(|g|⁻¹ + |g|)|φ₃|` behaves like `|z − p|^{k−m}` at `p`. So `F` is
/// immersed iff `k = m`, has a branch point of order `k − m` if `k > m`, and
/// a pole if `k < m`. A point where `g` is regular and nonzero has `m = 0`.
pub fn classify_branch(data: &WeierstrassData, p: &SpecialPoint) -> Result<BranchClass, WeierstrassError> {
    let at = p.location;
    if data.is_puncture(at) {
        return Err(WeierstrassError::PunctureExcluded(at));
    }
    let m = data.g.local_order(at)?.abs();
    let k = data.phi3.local_order(at)?;
    match k - m {
        0 => Ok(BranchClass::Immersed),
        d if d > 0 => Ok(BranchClass::BranchOrder(d as u32)),
        _ => Err(WeierstrassError::Inadmissible { at, k, m }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn data(g: &str, phi3: &str) -> WeierstrassData {
        WeierstrassData::from_strings(g, phi3, DomainSpec::disk(2.0, 16, 8), c(0.5, 0.0)).unwrap()
    }

    #[test]
    fn removable_fallback_recovers_enneper_at_origin() {
        let d = data("z", "z");
        let v = phi(&d, c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!((v[0] - c(0.5, 0.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((v[1] - c(0.0, 0.5)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[2].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(conformal_factor(&d, c(0.0, 0.0)).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn genuine_pole_is_reported() {
        let d = data("z", "1");
        assert!(matches!(phi(&d, c(0.0, 0.0)), Err(WeierstrassError::PoleHit(_))));
    }

    #[test]
    fn normal_is_orthogonal_to_phi() {
        let d = data("exp(i*z) + z^2", "1 + z");
        for z in [c(0.3, -0.2), c(1.1, 0.7), c(-0.4, 1.5)] {
            let n = normal(&d, z).unwrap();
            assert_abs_diff_eq!(n.norm(), 1.0, epsilon = 1e-14);
            let v = phi(&d, z).unwrap();
            let dot = v[0] * n.x + v[1] * n.y + v[2] * n.z;
            assert!(dot.norm() < 1e-12 * (1.0 + v[2].norm()));
        }
    }

    #[test]
    fn g_identically_zero_is_rejected() {
        let e = WeierstrassData::from_strings("0", "1", DomainSpec::disk(1.0, 8, 2), c(0.0, 0.0));
        assert!(matches!(e, Err(WeierstrassError::DegenerateGaussMap(_))));
    }

    #[test]
    fn inadmissible_special_point_is_rejected() {
        let d = data("z", "z");
        let err = d.with_special_points(vec![SpecialPoint::new(c(0.0, 0.0), PointKind::Zero)]);
        assert!(err.is_ok());
        let d = data("z^2", "z");
        let err = d.with_special_points(vec![SpecialPoint::new(c(0.0, 0.0), PointKind::Zero)]);
        assert!(matches!(err, Err(WeierstrassError::Inadmissible { k: 1, m: 2, .. })));
    }

    #[test]
    fn open_loop_is_rejected() {
        let d = data("z", "1");
        let lp = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        assert!(matches!(periods(&d, &lp), Err(WeierstrassError::OpenLoop { .. })));
    }
}

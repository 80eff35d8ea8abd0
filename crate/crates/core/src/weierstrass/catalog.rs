use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::expr::{PointKind, SpecialPoint};
use crate::mesh::{generate, Point, TriMesh};

use super::{DomainSpec, WeierstrassData, WeierstrassError};

#[derive(Debug, Clone)]
pub enum CatalogEntry {
    Data(Box<WeierstrassData>),
    Mesh(TriMesh),
}

fn origin() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `g = z`, `φ₃ = 1/z` on `e⁻² < |z| < e²`; the neck is the unit circle.
pub fn catenoid() -> WeierstrassData {
    let domain = DomainSpec::annulus((-2f64).exp(), 2f64.exp(), 96, 48)
        .with_punctures(vec![SpecialPoint::new(origin(), PointKind::Unknown)]);
    WeierstrassData::from_strings("z", "1/z", domain, Complex64::new(1.0, 0.0)).expect("catenoid data are valid")
}

/// `g = e^{iz}`, `φ₃ = 1` on one full turn `[−π, π] × [−1.5, 1.5]`.
pub fn helicoid() -> WeierstrassData {
    let domain = DomainSpec::rectangle([-PI, PI], [-1.5, 1.5], 96, 48);
    WeierstrassData::from_strings("exp(i*z)", "1", domain, origin()).expect("helicoid data are valid")
}

/// `g = z`, `φ₃ = z` on the unit disk, where the surface is embedded and stable.
pub fn enneper() -> WeierstrassData {
    WeierstrassData::from_strings("z", "z", DomainSpec::disk(1.0, 64, 24), origin()).expect("Enneper data are valid")
}

pub fn plane_disk() -> TriMesh {
    generate::flat_disk(48, 1.0)
}

/// Graph of `w = zⁿ` in C² ≅ R⁴, as `(Re z, Im z, Re zⁿ, Im zⁿ)`.
///
/// Its total curvature over `|z| < R` is `2π(n − 1)·n²R^{2n−2}/(1 + n²R^{2n−2})`,
/// so the radius is chosen large enough that the tail beyond it holds under
/// 0.25% of the limit `2π(n − 1)`. Rings are spaced geometrically so the
/// triangles stay well shaped as the surface stretches outward.
pub fn holomorphic_curve(n: u32) -> Result<TriMesh, WeierstrassError> {
    if n == 0 {
        return Err(WeierstrassError::UnknownCatalog("holomorphic_curve(0)".into()));
    }
    let radius = if n == 1 {
        1.0
    } else {
        let nn = (n * n) as f64;
        (400.0 / nn).powf(1.0 / (2.0 * (n - 1) as f64)).max(1.0)
    };
    Ok(holomorphic_curve_mesh(n, radius, 128, 48))
}

/// `nu` vertices per ring and `nv` rings, the innermost at `radius/200`.
pub fn holomorphic_curve_mesh(n: u32, radius: f64, nu: usize, nv: usize) -> TriMesh {
    let r_min = radius / 200.0;
    let place = |z: Complex64| {
        let w = z.powu(n);
        Point::new(z.re, z.im, w.re, w.im)
    };
    let mut verts = vec![place(origin())];
    for j in 0..nv {
        let r = r_min * (radius / r_min).powf(j as f64 / (nv - 1) as f64);
        // stagger alternate rings by half a step
        let phase = if j % 2 == 1 { 0.5 } else { 0.0 };
        for i in 0..nu {
            verts.push(place(Complex64::from_polar(r, TAU * (i as f64 + phase) / nu as f64)));
        }
    }
    let ring = |j: usize| -> Vec<usize> { (0..nu).map(|i| 1 + j * nu + i).collect() };
    let mut faces: Vec<[usize; 3]> = (0..nu).map(|i| [0, 1 + i, 1 + (i + 1) % nu]).collect();
    for j in 1..nv {
        let p_in = if (j - 1) % 2 == 1 { 0.5 / nu as f64 } else { 0.0 };
        let p_out = if j % 2 == 1 { 0.5 / nu as f64 } else { 0.0 };
        faces.extend(generate::join_rings(&ring(j - 1), p_in, &ring(j), p_out));
    }
    TriMesh::new(4, verts, faces).expect("holomorphic curve mesh is valid")
}

/// Look up an entry by name: `catenoid`, `helicoid`, `enneper`,
/// `plane_disk`, or `holomorphic_curve(n)`.
pub fn catalog(name: &str) -> Result<CatalogEntry, WeierstrassError> {
    let name = name.trim();
    match name {
        "catenoid" => Ok(CatalogEntry::Data(Box::new(catenoid()))),
        "helicoid" => Ok(CatalogEntry::Data(Box::new(helicoid()))),
        "enneper" => Ok(CatalogEntry::Data(Box::new(enneper()))),
        "plane_disk" => Ok(CatalogEntry::Mesh(plane_disk())),
        _ => {
            let n = name
                .strip_prefix("holomorphic_curve(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|d| d.trim().parse::<u32>().ok())
                .ok_or_else(|| WeierstrassError::UnknownCatalog(name.to_string()))?;
            holomorphic_curve(n).map(CatalogEntry::Mesh)
        }
    }
}

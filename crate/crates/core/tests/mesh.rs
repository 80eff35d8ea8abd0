use std::f64::consts::{PI, TAU};

use minsurf::mesh::generate::{crossed_rectangles, flat_disk, hemisphere};
use minsurf::mesh::io::{export, import, Format};
use minsurf::mesh::{ball_area, convex_hull_violation, intersects_self, point3, TriMesh};
use minsurf::quadrature::GaussLegendre;
use minsurf::weierstrass::{catenoid, enneper, tessellate, DomainSpec};

fn catenoid_with_neck_nodes() -> TriMesh {
    // 49 log-radial nodes put node row 24 exactly on |z| = 1
    let d = catenoid()
        .with_domain(catenoid().domain.with_resolution(96, 49))
        .unwrap();
    tessellate(&d).unwrap()
}

#[test]
fn flat_disk_area() {
    let d = flat_disk(18, 1.0);
    assert!((d.area() - PI).abs() / PI < 2e-3);
    assert_eq!(TriMesh::empty(3).area(), 0.0);
}

#[test]
fn catenoid_total_curvature_over_wide_annulus() {
    let d = catenoid()
        .with_domain(DomainSpec::annulus((-3f64).exp(), 3f64.exp(), 192, 96).with_punctures(catenoid().domain.punctures))
        .unwrap();
    let tc = tessellate(&d).unwrap().angle_defects().total_curvature;
    assert!((tc - 4.0 * PI).abs() / (4.0 * PI) < 0.03, "{tc}");
}

#[test]
fn geodesic_distances() {
    let path = TriMesh::new(
        3,
        vec![point3(0.0, 0.0, 0.0), point3(1.0, 0.0, 0.0), point3(2.0, 0.0, 0.0), point3(1.0, 1.0, 0.0)],
        vec![[0, 1, 3], [1, 2, 3]],
    )
    .unwrap();
    let d = path.geodesic_distance(0).unwrap();
    assert_eq!(&d[..3], &[0.0, 1.0, 2.0]);

    // neck to boundary: ∫ λ d|z| along the radial line from 1 to e² is sinh 2
    let m = catenoid_with_neck_nodes();
    let neck = 24 * 96;
    assert!((m.vertices()[neck] - point3(0.0, 0.0, 0.0)).norm() < 1e-9);
    let dist = m.geodesic_distance(neck).unwrap();
    let flags = m.boundary_flags();
    let to_boundary = (0..m.vertex_count()).filter(|&v| flags[v]).map(|v| dist[v]).fold(f64::INFINITY, f64::min);
    let oracle = GaussLegendre::standard().integrate(1.0, 2f64.exp(), |r| 0.5 * (1.0 / r + r) / r);
    assert!((oracle - 2f64.sinh()).abs() < 1e-8);
    assert!((to_boundary - oracle).abs() / oracle < 0.1, "{to_boundary} vs {oracle}");
}

/// Area of the catenoid piece `|t| ≤ 2` inside `B(0, r)`, where `0 = F(1)` is
/// on the neck. With `F = (1 − cosh t cos s, −cosh t sin s, t)`,
/// `|F|² ≤ r²` iff `cos s ≥ (1 + cosh²t + t² − r²)/(2 cosh t)`, so each
/// `t`-slice contributes an arc of known angular width.
fn catenoid_ball_area_oracle(r: f64) -> f64 {
    let gl = GaussLegendre::new(16);
    let slice = |t: f64| {
        let q = (1.0 + t.cosh().powi(2) + t * t - r * r) / (2.0 * t.cosh());
        t.cosh().powi(2) * 2.0 * q.clamp(-1.0, 1.0).acos()
    };
    let n = 4000;
    (0..n)
        .map(|k| {
            let a = -2.0 + 4.0 * k as f64 / n as f64;
            gl.integrate(a, a + 4.0 / n as f64, slice)
        })
        .sum()
}

#[test]
fn catenoid_ball_areas_match_quadrature() {
    let m = catenoid_with_neck_nodes();
    let p = m.vertices()[24 * 96];
    for r in [0.5, 1.0, 1.5, 2.5, 3.5] {
        let a = ball_area(&m, &p, r);
        let oracle = catenoid_ball_area_oracle(r);
        assert!((a - oracle).abs() / oracle < 0.01, "r = {r}: {a} vs {oracle}");
    }
}

#[test]
fn flat_disk_ball_saturates() {
    let d = flat_disk(24, 1.0);
    let c = point3(0.0, 0.0, 0.0);
    assert!((ball_area(&d, &c, 0.5) - PI / 4.0).abs() / (PI / 4.0) < 5e-3);
    let full = d.area();
    for r in [1.0, 1.2, 7.0] {
        assert!((ball_area(&d, &c, r) - full).abs() <= 1e-12 * full);
    }
}

#[test]
fn convex_hull_examples() {
    assert!(convex_hull_violation(&flat_disk(8, 1.0)).unwrap() <= 0.0);
    let cat = tessellate(&catenoid()).unwrap();
    assert!(convex_hull_violation(&cat).unwrap() <= 1e-9);
    let h = convex_hull_violation(&hemisphere(12, 1.0)).unwrap();
    assert!((h - 1.0).abs() < 1e-12);
}

#[test]
fn self_intersection_examples() {
    assert!(intersects_self(&flat_disk(10, 1.0)).unwrap().is_none());
    assert!(intersects_self(&crossed_rectangles()).unwrap().is_some());
    // Enneper's surface is embedded for |z| < √3 and crosses itself beyond
    let inner = enneper().with_domain(DomainSpec::disk(1.5, 64, 24)).unwrap();
    assert!(intersects_self(&tessellate(&inner).unwrap()).unwrap().is_none());
    let outer = enneper().with_domain(DomainSpec::disk(2.0, 64, 24)).unwrap();
    assert!(intersects_self(&tessellate(&outer).unwrap()).unwrap().is_some());
}

#[test]
fn single_triangle_round_trip() {
    let t = TriMesh::new(
        3,
        vec![point3(0.1, 0.2, 0.3), point3(1.0 / 3.0, 0.0, -2.5e-7), point3(0.0, TAU, 1e10)],
        vec![[0, 1, 2]],
    )
    .unwrap();
    for f in [Format::Obj, Format::Ply] {
        assert_eq!(import(&export(&t, f).unwrap()).unwrap(), t);
    }
}

#[test]
fn malformed_ply_reports_line() {
    let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\nend_header\n0 0\n";
    let err = import(text).unwrap_err();
    assert!(err.to_string().starts_with("line 8:"), "{err}");
}

use std::f64::consts::TAU;
use std::sync::LazyLock;

use nalgebra::{Rotation3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;

use minsurf::expr::ComplexExpr;
use minsurf::mesh::generate::{flat_disk, hemisphere};
use minsurf::mesh::io::{export, import, Format};
use minsurf::mesh::{ball_area, point3, Point, TriMesh};
use minsurf::plateau::{build_disk, solve, BoundaryCurve, BoundaryProblem, PlateauConfig};
use minsurf::verify::{boundary_distance, density_profile, extended_density_profile, MONOTONE_TOLERANCE};
use minsurf::weierstrass::{catenoid, tessellate, DomainSpec};

fn jitter(mesh: &TriMesh, seed: &[f64], amp: f64) -> TriMesh {
    let n = seed.len();
    let verts = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, p)| {
            let mut q = *p;
            for c in 0..3 {
                q[c] += amp * seed[(3 * v + c) % n];
            }
            q
        })
        .collect();
    TriMesh::new(mesh.dim(), verts, mesh.faces().to_vec()).unwrap()
}

fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("z".to_string()),
        Just("i".to_string()),
        (1u32..9).prop_map(|n| n.to_string()),
        (1u32..99).prop_map(|n| format!("0.{n}")),
    ];
    leaf.prop_recursive(4, 24, 2,  |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})+({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})-({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(2+({b})^2)")),
            (inner.clone(), 1u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("exp({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.prop_map(|a| format!("cos({a})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_format_parse_is_stable(text in expr_text()) {
        let e = ComplexExpr::parse(&text).unwrap();
        let again = ComplexExpr::parse(&e.to_string()).unwrap();
        prop_assert_eq!(again.to_string(), e.to_string());
        let z = Complex64::new(0.3, -0.2);
        if let (Ok(a), Ok(b)) = (e.eval(z), again.eval(z)) {
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn derivative_matches_difference_quotient(text in expr_text(), x in -0.8f64..0.8, y in -0.8f64..0.8) {
        let e = ComplexExpr::parse(&text).unwrap();
        let z = Complex64::new(x, y);
        let h = 1e-5;
        let (Ok(d), Ok(fp), Ok(fm), Ok(gp), Ok(gm)) = (
            e.eval_derivative(z),
            e.eval(z + h),
            e.eval(z - h),
            e.eval(z + Complex64::i() * h),
            e.eval(z - Complex64::i() * h),
        ) else {
            return Ok(());
        };
        let scale = 1.0 + fp.norm().max(fm.norm()) / h * 1e-9;
        prop_assume!(d.norm() < 1e6 && fp.norm() < 1e6);
        let dx = (fp - fm) / (2.0 * h);
        let dy = (gp - gm) / (2.0 * Complex64::i() * h);
        prop_assert!((d - dx).norm() <= 1e-4 * (scale + d.norm()), "{} {} {}", text, d, dx);
        prop_assert!((d - dy).norm() <= 1e-4 * (scale + d.norm()), "{} {} {}", text, d, dy);
    }

    #[test]
    fn gauss_bonnet_closes(seed in prop::collection::vec(-1.0f64..1.0, 17), rings in 2usize..9, which in 0u8..2) {
        let base = if which == 0 { flat_disk(rings, 1.0) } else { hemisphere(rings, 1.0) };
        let m = jitter(&base, &seed, 0.02 / rings as f64);
        let d = m.angle_defects();
        let chi = m.euler_characteristic() as f64;
        prop_assert!((d.interior_sum + d.boundary_turning - TAU * chi).abs() < 1e-8);
    }

    #[test]
    fn ball_area_is_monotone(seed in prop::collection::vec(-1.0f64..1.0, 5), r1 in 0.0f64..2.5, dr in 0.0f64..1.0) {
        let m = hemisphere(10, 1.0);
        let p = point3(seed[0], seed[1], seed[2].abs());
        let a1 = ball_area(&m, &p, r1);
        let a2 = ball_area(&m, &p, r1 + dr);
        prop_assert!(a1 <= a2 + 1e-13);
        prop_assert!(a2 <= m.area() + 1e-12);
    }

    #[test]
    fn area_is_rigid_motion_invariant(axis in prop::array::uniform3(-1.0f64..1.0), angle in 0.0f64..TAU,
                                      shift in prop::array::uniform3(-10.0f64..10.0)) {
        let v = Vector3::from(axis);
        prop_assume!(v.norm() > 1e-3);
        let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(v), angle);
        let t = Vector3::from(shift);
        let m = hemisphere(8, 1.0);
        let moved = m.map_vertices(|p| {
            let q = rot * Vector3::new(p.x, p.y, p.z) + t;
            point3(q.x, q.y, q.z)
        });
        prop_assert!((moved.area() - m.area()).abs() <= 1e-12 * m.area().max(1.0) * 10.0);
    }

    #[test]
    fn export_import_is_bit_identical(seed in prop::collection::vec(-1e3f64..1e3, 11), ply in any::<bool>()) {
        let mut m = jitter(&flat_disk(3, 1.0), &seed, 1e-3);
        let n = m.vertex_count();
        m.set_attribute("K", (0..n).map(|v| seed[v % seed.len()] / 7.0).collect()).unwrap();
        if ply {
            prop_assert_eq!(import(&export(&m, Format::Ply).unwrap()).unwrap(), m);
        } else {
            let plain = TriMesh::new(3, m.vertices().to_vec(), m.faces().to_vec()).unwrap();
            prop_assert_eq!(import(&export(&plain, Format::Obj).unwrap()).unwrap(), plain);
        }
    }

    #[test]
    fn export_import_r4(seed in prop::collection::vec(-5.0f64..5.0, 12)) {
        let verts: Vec<Point> = (0..3).map(|k| Point::new(seed[4 * k], seed[4 * k + 1], seed[4 * k + 2], seed[4 * k + 3])).collect();
        prop_assume!(minsurf::mesh::triangle_area(&verts[0], &verts[1], &verts[2]) > 1e-6);
        let m = TriMesh::new(4, verts, vec![[0, 1, 2]]).unwrap();
        prop_assert_eq!(import(&export(&m, Format::Ply).unwrap()).unwrap(), m);
    }
}

fn catenoid_piece() -> &'static TriMesh {
    static MESH: LazyLock<TriMesh> = LazyLock::new(|| {
        let data = catenoid()
            .with_domain(DomainSpec::annulus((-2f64).exp(), 2f64.exp(), 96, 48).with_punctures(catenoid().domain.punctures))
            .unwrap();
        tessellate(&data).unwrap()
    });
    &MESH
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn area_never_exceeds_energy_along_the_solve(
        a in -0.3f64..0.3, k in 2u32..5, b in -0.6f64..0.6, c in -0.3f64..0.3, skew in 0.0f64..0.3, seed in 0u64..1000,
    ) {
        // star-shaped planar shadow, so the curve is simple
        let r = format!("(1 + {a}*sin({k}*t))");
        let curve = BoundaryCurve::parametric(
            &[&format!("{r}*cos(t)"), &format!("{r}*sin(t)"), &format!("{b}*sin(2*t) + {c}*cos(3*t)")],
            TAU,
        )
        .unwrap();
        let problem = BoundaryProblem::new(curve, [0.0, TAU / 3.0, 2.0 * TAU / 3.0]).unwrap();
        let disk = build_disk(48, 8).unwrap();
        let cfg = PlateauConfig { skew, seed, max_iters: 300, ..PlateauConfig::default() };
        let st = solve(&problem, &disk, &cfg).unwrap();
        prop_assert_eq!(st.area_history.len(), st.energy_history.len());
        for (area, energy) in st.area_history.iter().zip(&st.energy_history) {
            prop_assert!(*area <= energy * (1.0 + 1e-12));
        }
        prop_assert!(st.energy_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn catenoid_density_is_monotone_inside(v in 0usize..4704, steps in 5usize..30) {
        let m = catenoid_piece();
        let p = m.vertices()[v % m.vertex_count()];
        let reach = boundary_distance(m, &p);
        prop_assume!(reach > 0.2);
        let radii: Vec<f64> = (1..=steps).map(|k| reach * k as f64 / steps as f64).collect();
        let prof = density_profile(m, &p, &radii).unwrap();
        prop_assert!(prof.monotone_violation <= MONOTONE_TOLERANCE, "{}", prof.monotone_violation);
    }

    #[test]
    fn catenoid_extended_density_never_drops(v in 0usize..4704) {
        let m = catenoid_piece();
        let flags = m.boundary_flags();
        let v = v % m.vertex_count();
        prop_assume!(!flags[v]);
        let p = m.vertices()[v];
        let top = 3.0 * m.bounding_scale();
        let radii: Vec<f64> = (1..=40).map(|k| top * k as f64 / 40.0).collect();
        let prof = extended_density_profile(m, &p, &radii).unwrap();
        prop_assert!(prof.monotone_violation <= MONOTONE_TOLERANCE, "{}", prof.monotone_violation);
    }
}

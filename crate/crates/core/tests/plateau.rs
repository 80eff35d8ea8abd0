use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use minsurf::mesh::{convex_hull_violation, point3, Point, TriMesh};
use minsurf::plateau::{
    build_disk, courant_lebesgue_check, energy, harmonic_extend, map_area, solve, BoundaryCurve, BoundaryProblem,
    DiskMesh, PlateauConfig, PlateauError, ProblemSpec,
};
use minsurf::weierstrass::{catenoid, tessellate};

fn circle_problem(anchors: [f64; 3]) -> BoundaryProblem {
    let c = BoundaryCurve::parametric(&["cos(t)", "sin(t)", "0"], TAU).unwrap();
    BoundaryProblem::new(c, anchors).unwrap()
}

fn thirds() -> [f64; 3] {
    [0.0, TAU / 3.0, 2.0 * TAU / 3.0]
}

fn boundary_of(disk: &DiskMesh, f: impl Fn(f64, f64) -> Point) -> Vec<Point> {
    disk.boundary()
        .map(|v| {
            let [x, y] = disk.coords(v);
            f(x, y)
        })
        .collect()
}

/// Interior values from a dense solve of the full Laplacian with boundary rows
/// replaced by identity rows.
fn dense_extension(disk: &DiskMesh, boundary: &[Point], coord: usize) -> Vec<f64> {
    let n = disk.vertex_count();
    let mut a = disk.laplacian().to_dense();
    let mut b = DVector::zeros(n);
    for (k, v) in disk.boundary().enumerate() {
        a.set_row(v, &DMatrix::<f64>::identity(n, n).row(v));
        b[v] = boundary[k][coord];
    }
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

#[test]
fn equilateral_pair_weight() {
    let h = 3f64.sqrt() / 2.0;
    let m = TriMesh::new(
        3,
        vec![point3(0.0, 0.0, 0.0), point3(1.0, 0.0, 0.0), point3(0.5, h, 0.0), point3(0.5, -h, 0.0)],
        vec![[0, 1, 2], [1, 0, 3]],
    )
    .unwrap();
    let w = m.cotan_weights().into_iter().find(|&(e, _)| e == (0, 1)).unwrap().1;
    assert!((w - 1.0 / 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn harmonic_extension_examples() {
    let d = build_disk(12, 2).unwrap();
    let c = point3(0.3, -2.0, 7.5);
    let out = harmonic_extend(&d, &vec![c; 12]).unwrap();
    assert!(out.iter().all(|p| (p - c).norm() < 1e-14));

    let affine = |x: f64, y: f64| point3(2.0 * x - y + 0.5, 0.25 * x + 3.0 * y, -x + 1.0);
    let b = boundary_of(&d, affine);
    let out = harmonic_extend(&d, &b).unwrap();
    for coord in 0..3 {
        let oracle = dense_extension(&d, &b, coord);
        for v in 0..d.vertex_count() {
            assert!((out[v][coord] - oracle[v]).abs() < 1e-12);
            let [x, y] = d.coords(v);
            assert!((out[v][coord] - affine(x, y)[coord]).abs() < 1e-12);
        }
    }

    let d = build_disk(64, 16).unwrap();
    let out = harmonic_extend(&d, &boundary_of(&d, |x, y| point3(x, y, 0.0))).unwrap();
    for v in 0..d.vertex_count() {
        assert!((out[v] - d.flat().vertices()[v]).norm() < 1e-8);
    }
}

#[test]
fn harmonic_extension_minimizes_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d = build_disk(24, 5).unwrap();
    let b = boundary_of(&d, |x, y| point3(x, y, x * x - y * y + 0.3 * x * y * y));
    let f = harmonic_extend(&d, &b).unwrap();
    let e0 = energy(&d, &f);
    for _ in 0..100 {
        let v = rng.gen_range(0..d.n_interior());
        let delta = point3(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 1e-3;
        let mut g = f.clone();
        g[v] += delta;
        assert!(energy(&d, &g) > e0);
    }
    // discrete maximum principle, coordinate by coordinate
    for c in 0..3 {
        let lo = b.iter().map(|p| p[c]).fold(f64::INFINITY, f64::min);
        let hi = b.iter().map(|p| p[c]).fold(f64::NEG_INFINITY, f64::max);
        assert!(f.iter().all(|p| p[c] >= lo - 1e-12 && p[c] <= hi + 1e-12));
    }
}

#[test]
fn energy_and_area_examples() {
    let d = build_disk(128, 24).unwrap();
    let id: Vec<Point> = d.flat().vertices().to_vec();
    assert!((energy(&d, &id) - PI).abs() / PI < 1e-3);
    assert!((map_area(&d, &id) - PI).abs() / PI < 1e-3);
    let stretched: Vec<Point> = id.iter().map(|p| point3(p.x, 2.0 * p.y, 0.0)).collect();
    let (e, a) = (energy(&d, &stretched), map_area(&d, &stretched));
    assert!((e - 2.5 * PI).abs() / (2.5 * PI) < 0.01);
    assert!((a - 2.0 * PI).abs() / (2.0 * PI) < 0.01);
    assert!(e > a);
}

#[test]
fn circle_solution_is_the_flat_disk() {
    let d = build_disk(128, 24).unwrap();
    let st = solve(&circle_problem(thirds()), &d, &PlateauConfig::default()).unwrap();
    assert!(st.converged);
    assert!((st.area - PI).abs() / PI < 0.01);
    assert!(st.relative_gap() < 0.01);
    assert!(st.positions.iter().all(|p| p.z.abs() < 1e-3));
    assert!(convex_hull_violation(&st.mesh(&d).unwrap()).unwrap() <= 1e-3);
    let cl = courant_lebesgue_check(&d, &st.positions, [0.0, 0.0]).unwrap();
    assert!(cl.holds && cl.margin >= 0.05, "{}", cl.margin);
}

#[test]
fn skewed_starts_reach_the_same_energy() {
    let d = build_disk(64, 12).unwrap();
    let p = circle_problem(thirds());
    let reference = solve(&p, &d, &PlateauConfig::default()).unwrap().energy;
    for seed in [1, 2] {
        let cfg = PlateauConfig {
            skew: 0.25,
            seed,
            tol: 1e-13,
            ..PlateauConfig::default()
        };
        let st = solve(&p, &d, &cfg).unwrap();
        assert!(st.energy_history[0] > reference * (1.0 + 1e-3), "start is not skewed");
        assert!((st.energy - reference).abs() / reference < 1e-6, "seed {seed}: {} vs {reference}", st.energy);
        assert!(st.energy_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(st.area_history.iter().zip(&st.energy_history).all(|(a, e)| *a <= e + 1e-12));
    }
}

#[test]
fn anchor_rotation_does_not_change_the_minimum() {
    let d = build_disk(48, 10).unwrap();
    let curve = BoundaryCurve::parametric(&["cos(t)", "sin(t)", "0.3*cos(2*t)"], TAU).unwrap();
    let cfg = PlateauConfig {
        tol: 1e-13,
        ..PlateauConfig::default()
    };
    let a = [0.1, 2.0, 4.5];
    let e1 = solve(&BoundaryProblem::new(curve.clone(), a).unwrap(), &d, &cfg).unwrap().energy;
    let e2 = solve(&BoundaryProblem::new(curve, [a[1], a[2], a[0]]).unwrap(), &d, &cfg).unwrap().energy;
    assert!((e1 - e2).abs() / e1 < 1e-6, "{e1} vs {e2}");
}

#[test]
fn solver_output_satisfies_courant_lebesgue() {
    let d = build_disk(64, 12).unwrap();
    let curve = BoundaryCurve::parametric(&["cos(t)", "sin(t)", "0.5*sin(3*t)"], TAU).unwrap();
    let st = solve(&BoundaryProblem::new(curve, thirds()).unwrap(), &d, &PlateauConfig::default()).unwrap();
    for p in [[0.0, 0.0], [0.4, -0.2]] {
        assert!(courant_lebesgue_check(&d, &st.positions, p).unwrap().holds);
    }
}

#[test]
fn multi_loop_boundary_is_rejected() {
    let cat = tessellate(&catenoid()).unwrap();
    let err = BoundaryCurve::from_mesh_boundary(&cat).unwrap_err();
    assert!(matches!(err, PlateauError::NotSingleCurve));
    assert_eq!(err.to_string(), "boundary must be a single closed curve");
}

#[test]
fn problem_file_round() {
    let text = r#"{"curve": {"x": "cos(t)", "y": "sin(t)", "z": "0", "period": 6.283185307179586},
                   "anchors": [0, 2.0943951023931953, 4.1887902047863905],
                   "n_boundary": 48, "n_rings": 8, "max_iters": 50}"#;
    let spec = ProblemSpec::from_json(text).unwrap();
    let d = build_disk(spec.n_boundary, spec.n_rings).unwrap();
    let st = solve(&spec.problem, &d, &spec.config).unwrap();
    assert!(st.iteration <= 50);
    assert!((st.area - PI).abs() / PI < 0.01);
}


use std::path::Path;
use std::process::{Command, Output};

use minsurf::mesh::generate::{flat_disk, hemisphere};
use minsurf::mesh::{Point, TriMesh};
use minsurf::mesh::io::export_ply;
use serde_json::Value;
use tempfile::TempDir;

fn minsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minsurf")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = path(dir, name);
    std::fs::write(&p, text).unwrap();
    p
}

const CIRCLE: &str = r#"{"curve": {"x": "cos(t)", "y": "sin(t)", "z": "0", "period": 6.283185307179586},
  "anchors": [0, 2.0943951023931953, 4.1887902047863905], "n_boundary": 64, "n_rings": 12}"#;

#[test]
fn generate_catalog_entries() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = minsurf(&["generate", "catenoid", "--res", "96x48", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    let tc = r["total_curvature"].as_f64().unwrap();
    // e^{±2} holds tanh(2) of the full 4π
    assert!((tc - 4.0 * std::f64::consts::PI * 2f64.tanh()).abs() < 0.02 * tc, "{tc}");
    assert!(Path::new(&path(&dir, "catenoid.ply")).exists());
    assert!(Path::new(&path(&dir, "catenoid.obj")).exists());
    let ply = std::fs::read_to_string(path(&dir, "catenoid.ply")).unwrap();
    assert!(ply.contains("property double lambda") && ply.contains("property double K"));

    let o = minsurf(&["generate", "plane_disk", "--out", out]);
    assert_eq!(code(&o), 0);
    assert!(stdout_json(&o)["total_curvature"].as_f64().unwrap().abs() < 1e-9);

    // R⁴ meshes get PLY only
    let o = minsurf(&["generate", "holomorphic_curve(2)", "--out", out]);
    assert_eq!(code(&o), 0);
    assert!(Path::new(&path(&dir, "holomorphic_curve_2.ply")).exists());
    assert!(!Path::new(&path(&dir, "holomorphic_curve_2.obj")).exists());

    assert_eq!(code(&minsurf(&["generate", "catenoidd", "--out", out])), 2);
    assert_eq!(code(&minsurf(&["generate", "plane_disk", "--res", "8x8", "--out", out])), 2);
}

#[test]
fn generate_reports_branch_points() {
    let dir = TempDir::new().unwrap();
    let data = write(
        &dir,
        "branch.json",
        r#"{"g": "z", "phi3": "z^3", "domain": {"shape": "disk", "radius": 1, "resolution": [24, 8]},
            "base": [0.5, 0], "special": [{"at": [0, 0], "kind": "zero"}]}"#,
    );
    let o = minsurf(&["generate", "--data", &data, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let b = &stdout_json(&o)["branch_points"][0];
    assert_eq!(b["at"], serde_json::json!([0.0, 0.0]));
    // λ vanishes to order k − m = 2 at the origin
    assert_eq!(b["class"]["branch_order"], 2);

    let bad = write(
        &dir,
        "pole.json",
        r#"{"g": "z^-2", "phi3": "z", "domain": {"shape": "disk", "radius": 1, "resolution": [24, 8]},
            "base": [0.5, 0], "special": [{"at": [0, 0], "kind": "pole"}]}"#,
    );
    let o = minsurf(&["generate", "--data", &bad, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("inadmissible data at 0"));
}

#[test]
fn solve_circle_and_restarts() {
    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "circle.json", CIRCLE);
    let out = path(&dir, "run");
    let o = minsurf(&["solve", &problem, "--out", &out, "--restarts", "3", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    let area = r["area"].as_f64().unwrap();
    assert!((area - std::f64::consts::PI).abs() < 0.01 * std::f64::consts::PI, "{area}");
    assert!(r["courant_lebesgue"]["holds"].as_bool().unwrap());
    let runs = r["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    let best = runs.iter().map(|x| x["energy"].as_f64().unwrap()).fold(f64::INFINITY, f64::min);
    assert_eq!(r["energy"].as_f64().unwrap(), best);
    assert_eq!(runs[0]["seed"], 7);
    assert!(Path::new(&out).join("solution.ply").exists());
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(Path::new(&out).join("report.json")).unwrap()).unwrap();
    assert_eq!(saved, r);
}

#[test]
fn solve_failures_have_distinct_codes() {
    let dir = TempDir::new().unwrap();
    let bow = write(
        &dir,
        "bow.json",
        r#"{"curve": {"points": [[0,0,0],[1,1,0],[1,0,0],[0,1,0]]}, "anchors": [0, 1, 2], "n_boundary": 12, "n_rings": 2}"#,
    );
    let o = minsurf(&["solve", &bow, "--out", &path(&dir, "a")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("intersects itself"));

    let problem = write(&dir, "circle.json", CIRCLE);
    let o = minsurf(&["solve", &problem, "--out", &path(&dir, "b"), "--max-iters", "2"]);
    assert_eq!(code(&o), 3);
    assert_eq!(stdout_json(&o)["converged"], false);

    assert_eq!(code(&minsurf(&["solve", &path(&dir, "missing.json"), "--out", &path(&dir, "c")])), 2);
}

#[test]
fn config_is_strict_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "circle.json", CIRCLE);
    let typo = write(&dir, "typo.json", r#"{"seeed": 1}"#);
    let o = minsurf(&["solve", &problem, "--config", &typo]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("seeed"));

    let wrong = write(&dir, "wrong.json", r#"{"command": "verify"}"#);
    assert_eq!(code(&minsurf(&["solve", &problem, "--config", &wrong])), 2);

    let cfg = write(
        &dir,
        "cfg.json",
        &format!(r#"{{"command": "solve", "seed": 5, "restarts": 2, "out": {:?}}}"#, path(&dir, "from_cfg")),
    );
    let o = minsurf(&["solve", &problem, "--config", &cfg, "--seed", "9"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["config"]["seed"], 9);
    assert_eq!(r["config"]["restarts"], 2);
    assert!(dir.path().join("from_cfg").join("report.json").exists());
}

#[test]
fn verify_plane_disk_passes_everything() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&minsurf(&["generate", "plane_disk", "--out", dir.path().to_str().unwrap()])), 0);
    let mesh = path(&dir, "plane_disk.ply");
    let o = minsurf(&["verify", &mesh, "all"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let reports = stdout_json(&o);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 11);
    let names: Vec<&str> = reports.iter().map(|r| r["check"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort_unstable();
    assert_eq!(names, sorted);
    for r in reports.iter().filter(|r| r["verdict"] == "pass") {
        assert!(r["discrepancy"].as_f64().unwrap() < 1e-3, "{r}");
    }

    let table = minsurf(&["verify", &mesh, "density", "pogorelov", "--format", "table"]);
    let text = String::from_utf8_lossy(&table.stdout);
    assert!(text.lines().next().unwrap().starts_with("check"));
    assert_eq!(text.lines().count(), 3);

    let o = minsurf(&["verify", &mesh, "densty"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("available: all, boundary_distance"));
}

#[test]
fn verify_catenoid_density_from_the_neck() {
    let dir = TempDir::new().unwrap();
    // e^{±3.5}, so every radius up to 10 stays inside the surface
    let data = write(
        &dir,
        "cat.json",
        r#"{"g": "z", "phi3": "1/z", "base": [1, 0], "punctures": [[0, 0]],
            "domain": {"shape": "annulus", "r0": 0.0301973834223185, "r1": 33.11545195869231, "resolution": [160, 96]}}"#,
    );
    assert_eq!(code(&minsurf(&["generate", "--data", &data, "--out", dir.path().to_str().unwrap()])), 0);
    let o = minsurf(&["verify", &path(&dir, "cat.ply"), "density", "--center", "neck", "--radii", "0.2:10:40"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &stdout_json(&o)[0];
    assert_eq!(r["verdict"], "pass");
    let theta: Vec<f64> = r["details"]["theta"].as_array().unwrap().iter().map(|t| t.as_f64().unwrap()).collect();
    assert_eq!(theta.len(), 40);
    assert!(theta.windows(2).all(|w| w[1] >= w[0] - 1e-3));
    assert!(theta[0] < 1.02 && theta[39] > 1.8, "{theta:?}");
}

#[test]
fn verify_hemisphere_divergence_is_informative() {
    let dir = TempDir::new().unwrap();
    let mesh = write(&dir, "hemisphere.ply", &export_ply(&hemisphere(24, 1.0)));
    let o = minsurf(&["verify", &mesh, "divergence"]);
    assert_eq!(code(&o), 0);
    let r = &stdout_json(&o)[0];
    assert_eq!(r["verdict"], "informative");
    let (lhs, rhs) = (r["lhs"].as_f64().unwrap(), r["rhs"].as_f64().unwrap());
    let xh = r["details"]["x_dot_h"].as_f64().unwrap();
    assert!(((rhs - lhs) - xh).abs() < 0.03 * lhs);
}

#[test]
fn verify_exit_code_reflects_failures() {
    let dir = TempDir::new().unwrap();
    // the paraboloid z = 2(x² + y²) is not minimal; its density about the vertex falls
    let disk = flat_disk(24, 1.0);
    let verts: Vec<Point> = disk.vertices().iter().map(|v| Point::new(v.x, v.y, 2.0 * (v.x * v.x + v.y * v.y), 0.0)).collect();
    let bowl = TriMesh::new(3, verts, disk.faces().to_vec()).unwrap();
    let mesh = write(&dir, "bowl.ply", &export_ply(&bowl));
    let o = minsurf(&["verify", &mesh, "density", "first_variation", "--center", "0,0,0", "--radii", "0.1:1:10"]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));
    let r = stdout_json(&o);
    assert_eq!(r[0]["verdict"], "fail");
    assert_eq!(r[1]["verdict"], "pass");
}

#[test]
fn deform_helicoid() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = minsurf(&["deform", "helicoid", "--theta", "0,pi/4,pi/2,2*pi", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = stdout_json(&o);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r["edge_length_deviation"].as_f64().unwrap() < 1e-6);
        assert!(r["gauss_map_deviation"].as_f64().unwrap() < 1e-12);
    }
    assert!(rows[2]["catenoid_fit_residual"].as_f64().unwrap() < 1e-4);
    assert!(rows[3]["max_vertex_shift"].as_f64().unwrap() < 1e-12);
    for k in 0..4 {
        assert!(Path::new(&path(&dir, &format!("helicoid_theta_{k}.ply"))).exists());
    }
    assert_eq!(code(&minsurf(&["deform", "plane_disk", "--theta", "1", "--out", out])), 2);
    assert_eq!(code(&minsurf(&["deform", "helicoid", "--theta", "z", "--out", out])), 2);
}

#[test]
fn export_round_trip() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&minsurf(&["generate", "enneper", "--out", dir.path().to_str().unwrap()])), 0);
    let obj = path(&dir, "copy.obj");
    assert_eq!(code(&minsurf(&["export", &path(&dir, "enneper.ply"), "--to", &obj])), 0);
    let a = minsurf::mesh::io::import(&std::fs::read_to_string(path(&dir, "enneper.obj")).unwrap()).unwrap();
    let b = minsurf::mesh::io::import(&std::fs::read_to_string(&obj).unwrap()).unwrap();
    assert_eq!(a.vertices(), b.vertices());
    assert_eq!(a.faces(), b.faces());
    assert_eq!(code(&minsurf(&["export", &path(&dir, "enneper.ply"), "--to", &path(&dir, "x.stl")])), 2);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "circle.json", CIRCLE);
    let a = minsurf(&["solve", &problem, "--out", &path(&dir, "a"), "--restarts", "2"]);
    let b = minsurf(&["solve", &problem, "--out", &path(&dir, "b"), "--restarts", "2"]);
    let strip = |o: &Output| String::from_utf8_lossy(&o.stdout).replace(&path(&dir, "a"), "").replace(&path(&dir, "b"), "");
    assert_eq!(strip(&a), strip(&b));

    assert_eq!(code(&minsurf(&["generate", "plane_disk", "--out", dir.path().to_str().unwrap()])), 0);
    let mesh = path(&dir, "plane_disk.ply");
    let v1 = minsurf(&["verify", &mesh, "all"]);
    let v2 = Command::new(env!("CARGO_BIN_EXE_minsurf"))
        .args(["verify", &mesh, "all"])
        .env("MINSURF_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(v1.stdout, v2.stdout);
}

#[test]
fn thread_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_minsurf"))
        .args(["generate", "plane_disk", "--out", std::env::temp_dir().to_str().unwrap()])
        .env("MINSURF_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&minsurf(&["frobnicate"])), 2);
    assert_eq!(code(&minsurf(&["verify"])), 2);
    assert_eq!(code(&minsurf(&["generate", "catenoid", "--res", "96"])), 2);
}

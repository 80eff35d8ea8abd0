use std::path::{Path, PathBuf};

use minsurf::mesh::io::{export_obj, export_ply, import, Format};
use minsurf::mesh::{convex_hull_violation, MeshError, Point, TriMesh};
use minsurf::plateau::{build_disk, courant_lebesgue_check, solve as plateau_solve, PlateauError, ProblemSpec};
use minsurf::verify::{format_table, run_checks, CheckOptions, Verdict, VerifyError};
use minsurf::weierstrass::{
    associate, catalog, classify_branch, fit_vertical_catenoid, parameter_grid, tessellate, CatalogEntry,
    WeierstrassData, WeierstrassError,
};
use minsurf::ComplexExpr;
use nalgebra::Vector3;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{ReportFormat, RunConfig};
use crate::json::to_fixed_string;
use crate::{CliError, DeformArgs, ExportArgs, GenerateArgs, SolveArgs, VerifyArgs};

impl From<WeierstrassError> for CliError {
    fn from(e: WeierstrassError) -> Self {
        match e {
            WeierstrassError::Quadrature(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<PlateauError> for CliError {
    fn from(e: PlateauError) -> Self {
        match e {
            PlateauError::Singular(_) | PlateauError::Residual(_) | PlateauError::NonFinite(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Linalg(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = flag.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// PLY always, OBJ too when the mesh lives in R³. Returns the paths written.
fn write_mesh(dir: &Path, stem: &str, mesh: &TriMesh) -> Result<Vec<String>, CliError> {
    let ply = dir.join(format!("{stem}.ply"));
    write(&ply, &export_ply(mesh))?;
    let mut files = vec![ply.display().to_string()];
    if mesh.dim() == 3 {
        let obj = dir.join(format!("{stem}.obj"));
        write(&obj, &export_obj(mesh)?)?;
        files.push(obj.display().to_string());
    }
    Ok(files)
}

fn stem_of(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect::<String>()
        .trim_end_matches('_')
        .to_string()
}

enum Source {
    Data(WeierstrassData),
    Mesh(TriMesh),
}

fn load_source(name: &Option<String>, data: &Option<PathBuf>) -> Result<(String, Source), CliError> {
    if let Some(path) = data {
        let d = WeierstrassData::from_json(&read(path)?)?;
        let stem = path.file_stem().map_or("surface".into(), |s| stem_of(&s.to_string_lossy()));
        return Ok((stem, Source::Data(d)));
    }
    let name = name.as_deref().expect("clap requires a name or --data");
    let entry = match catalog(name)? {
        CatalogEntry::Data(d) => Source::Data(*d),
        CatalogEntry::Mesh(m) => Source::Mesh(m),
    };
    Ok((stem_of(name), entry))
}

fn with_resolution(d: WeierstrassData, res: Option<[usize; 2]>) -> Result<WeierstrassData, CliError> {
    match res {
        Some([nu, nv]) => {
            let domain = d.domain.clone().with_resolution(nu, nv);
            Ok(d.with_domain(domain)?)
        }
        None => Ok(d),
    }
}

fn mesh_summary(mesh: &TriMesh) -> Value {
    json!({
        "vertices": mesh.vertex_count(),
        "faces": mesh.face_count(),
        "area": mesh.area(),
        "total_curvature": mesh.angle_defects().total_curvature,
        "boundary_length": mesh.boundary_length(),
    })
}

pub fn generate(args: GenerateArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let (stem, source) = load_source(&args.name, &args.data)?;
    let res = args.res.or(cfg.resolution);
    let (mesh, branches) = match source {
        Source::Data(d) => {
            let d = with_resolution(d, res)?;
            let mut branches = Vec::new();
            for p in &d.special_points {
                let class = match classify_branch(&d, p) {
                    Ok(c) => serde_json::to_value(c).expect("branch class serializes"),
                    Err(WeierstrassError::PunctureExcluded(_)) => json!("puncture"),
                    Err(e) => return Err(e.into()),
                };
                branches.push(json!({
                    "at": [p.location.re, p.location.im],
                    "kind": format!("{:?}", p.kind).to_lowercase(),
                    "class": class,
                }));
            }
            (tessellate(&d)?, branches)
        }
        Source::Mesh(m) => {
            if res.is_some() {
                return Err(CliError::Input(format!("`{stem}` is a fixed mesh; --res does not apply")));
            }
            (m, Vec::new())
        }
    };
    let dir = out_dir(args.out, cfg)?;
    let files = write_mesh(&dir, &stem, &mesh)?;
    let mut report = mesh_summary(&mesh);
    report["name"] = json!(stem);
    report["branch_points"] = json!(branches);
    report["files"] = json!(files);
    let text = to_fixed_string(&report);
    write(&dir.join(format!("{stem}.json")), &text)?;
    print!("{text}");
    Ok(())
}

pub fn solve(args: SolveArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let mut spec = ProblemSpec::from_json(&read(&args.problem)?)?;
    let c = &mut spec.config;
    if let Some(t) = args.tol.or(cfg.tol) {
        c.tol = t;
    }
    if let Some(m) = args.max_iters.or(cfg.max_iters) {
        c.max_iters = m;
    }
    if let Some(r) = args.restarts.or(cfg.restarts) {
        if r == 0 {
            return Err(CliError::Input("--restarts must be at least 1".into()));
        }
        c.restarts = r;
    }
    if let Some(s) = args.seed.or(cfg.seed) {
        c.seed = s;
    }
    let disk = build_disk(spec.n_boundary, spec.n_rings)?;
    let state = plateau_solve(&spec.problem, &disk, &spec.config)?;
    let mesh = state.mesh(&disk)?;
    let cl = courant_lebesgue_check(&disk, &state.positions, [0.0, 0.0])?;
    let worst_conformality = state
        .conformality_residual
        .iter()
        .map(|&(a, b)| a.abs().max(b.abs()))
        .fold(0.0, f64::max);
    let dir = out_dir(args.out, cfg)?;
    let files = write_mesh(&dir, "solution", &mesh)?;
    let report = json!({
        "energy": state.energy,
        "area": state.area,
        "gap": state.gap(),
        "relative_gap": state.relative_gap(),
        "iterations": state.iteration,
        "converged": state.converged,
        "best_restart": state.restart,
        "runs": state.runs,
        "conformality_residual_max": worst_conformality,
        "gaps_at_floor": state.gaps_at_floor,
        "convex_hull_violation": convex_hull_violation(&mesh)?,
        "courant_lebesgue": {
            "holds": cl.holds,
            "margin": cl.margin,
            "integral": cl.integral,
            "integral_bound": cl.integral_bound,
            "worst_min_ratio": cl.worst_min_ratio,
            "worst_interval": cl.worst_interval,
        },
        "n_boundary": spec.n_boundary,
        "n_rings": spec.n_rings,
        "config": spec.config,
        "files": files,
    });
    let text = to_fixed_string(&report);
    write(&dir.join("report.json"), &text)?;
    print!("{text}");
    if !state.converged {
        return Err(CliError::Numerical(format!(
            "solver did not converge within {} iterations",
            spec.config.max_iters
        )));
    }
    Ok(())
}

fn parse_point(text: &str) -> Result<Point, CliError> {
    let vals: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("expected comma-separated coordinates, got `{text}`")))?;
    match vals.as_slice() {
        [x, y, z] => Ok(Point::new(*x, *y, *z, 0.0)),
        [x, y, z, w] => Ok(Point::new(*x, *y, *z, *w)),
        _ => Err(CliError::Input(format!("a point needs 3 or 4 coordinates, got `{text}`"))),
    }
}

fn parse_radii(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Input(format!("expected start:stop:count, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    match n {
        0 => Err(bad()),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
    }
}

/// The mesh vertex nearest the vertex centroid; on a catenoid piece
/// symmetric about its neck this is a neck vertex.
fn neck_point(mesh: &TriMesh) -> Point {
    let n = mesh.vertex_count() as f64;
    let c = mesh.vertices().iter().fold(Point::zeros(), |acc, v| acc + v) / n;
    *mesh
        .vertices()
        .iter()
        .min_by(|a, b| (*a - c).norm().total_cmp(&(*b - c).norm()))
        .expect("mesh has vertices")
}

pub fn verify(args: VerifyArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let mesh = import(&read(&args.mesh)?)?;
    let center = match args.center.as_deref() {
        None | Some("deepest") => None,
        Some("neck") => Some(neck_point(&mesh)),
        Some(t) => Some(parse_point(t)?),
    };
    let opts = CheckOptions {
        center,
        radii: args.radii.as_deref().map(parse_radii).transpose()?,
        field: args.field.map(|f| f.split(';').map(|s| s.trim().to_string()).collect()),
        origin: args.origin.as_deref().map(parse_point).transpose()?,
        pogorelov_radius: args.pogorelov_radius,
        eigenvalues: args.eigenvalues,
    };
    let reports = run_checks(&mesh, &args.checks, &opts)?;
    let value = serde_json::to_value(&reports).expect("reports serialize");
    let text = to_fixed_string(&value);
    let out = args.out.or_else(|| cfg.out.as_ref().map(|d| d.join("verify.json")));
    if let Some(path) = out {
        write(&path, &text)?;
    }
    match args.format.or(cfg.format).unwrap_or_default() {
        ReportFormat::Json => print!("{text}"),
        ReportFormat::Table => print!("{}", format_table(&reports)),
    }
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        return Err(CliError::CheckFailed);
    }
    Ok(())
}

fn parse_angles(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            let e = ComplexExpr::parse(s.trim()).map_err(|e| CliError::Input(format!("angle `{s}`: {e}")))?;
            match e.eval(Complex64::new(0.0, 0.0)) {
                Ok(v) if e.is_constant() && v.im == 0.0 && v.re.is_finite() => Ok(v.re),
                _ => Err(CliError::Input(format!("angle `{s}` is not a real constant"))),
            }
        })
        .collect()
}

fn normals(mesh: &TriMesh) -> Option<Vec<Vector3<f64>>> {
    let (x, y, z) = (mesh.attribute("normal_x")?, mesh.attribute("normal_y")?, mesh.attribute("normal_z")?);
    Some((0..x.len()).map(|i| Vector3::new(x[i], y[i], z[i])).collect())
}

pub fn deform(args: DeformArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let thetas = parse_angles(&args.theta)?;
    let (stem, source) = load_source(&args.name, &args.data)?;
    let Source::Data(base) = source else {
        return Err(CliError::Input(format!("`{stem}` has no Weierstrass data to deform")));
    };
    let base = with_resolution(base, args.res.or(cfg.resolution))?;
    let grid0 = parameter_grid(&base)?;
    let mesh0 = grid0.mesh(&base)?;
    let edges = mesh0.edges();
    let lengths0 = grid0.edge_lengths(&base, &edges)?;
    let normals0 = normals(&mesh0).expect("tessellation carries normals");
    let dir = out_dir(args.out, cfg)?;

    let mut rows = Vec::new();
    for (k, &theta) in thetas.iter().enumerate() {
        let d = associate(&base, theta);
        let grid = parameter_grid(&d)?;
        let mesh = grid.mesh(&d)?;
        let lengths = grid.edge_lengths(&d, &edges)?;
        let edge_dev = lengths
            .iter()
            .zip(&lengths0)
            .map(|(l, l0)| (l - l0).abs() / l0)
            .fold(0.0, f64::max);
        let gauss_dev = normals(&mesh)
            .expect("tessellation carries normals")
            .iter()
            .zip(&normals0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let shift = mesh
            .vertices()
            .iter()
            .zip(mesh0.vertices())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let pts: Vec<Vector3<f64>> = mesh.vertices().iter().map(|v| Vector3::new(v.x, v.y, v.z)).collect();
        let fit = fit_vertical_catenoid(&pts);
        let files = write_mesh(&dir, &format!("{stem}_theta_{k}"), &mesh)?;
        rows.push(json!({
            "theta": theta,
            "edge_length_deviation": edge_dev,
            "gauss_map_deviation": gauss_dev,
            "max_vertex_shift": shift,
            "catenoid_fit_residual": fit.residual,
            "files": files,
        }));
    }
    let text = to_fixed_string(&Value::Array(rows));
    write(&dir.join(format!("{stem}_deform.json")), &text)?;
    print!("{text}");
    Ok(())
}

pub fn export(args: ExportArgs) -> Result<(), CliError> {
    let to = args.to.display().to_string();
    let format = Format::from_extension(&to)
        .ok_or_else(|| CliError::Input(format!("cannot tell the format of `{to}`; use .obj or .ply")))?;
    let mesh = import(&read(&args.mesh)?)?;
    let text = match format {
        Format::Obj => export_obj(&mesh)?,
        Format::Ply => export_ply(&mesh),
    };
    write(&args.to, &text)
}

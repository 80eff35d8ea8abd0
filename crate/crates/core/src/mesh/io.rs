//! OBJ, ASCII PLY and polyline text formats.
//!
//! Coordinates are printed with 17 significant digits so that export followed
//! by import reproduces every `f64` exactly.

use std::fmt::Write as _;

use super::{MeshError, Point, Polyline, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Obj,
    Ply,
}

impl Format {
    /// Guess the format from a file extension.
    pub fn from_extension(path: &str) -> Option<Self> {
        let ext = path.rsplit('.').next()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(Format::Obj),
            "ply" => Some(Format::Ply),
            _ => None,
        }
    }
}

pub fn export(mesh: &TriMesh, format: Format) -> Result<String, MeshError> {
    match format {
        Format::Obj => export_obj(mesh),
        Format::Ply => Ok(export_ply(mesh)),
    }
}

/// Import either format; PLY is recognised by its magic line.
pub fn import(text: &str) -> Result<TriMesh, MeshError> {
    if text.trim_start().starts_with("ply") {
        import_ply(text)
    } else {
        import_obj(text)
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn export_obj(mesh: &TriMesh) -> Result<String, MeshError> {
    if mesh.dim() != 3 {
        return Err(MeshError::ObjDimension);
    }
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", num(v.x), num(v.y), num(v.z));
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    Ok(out)
}

pub fn import_obj(text: &str) -> Result<TriMesh, MeshError> {
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        let mut it = body.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.map(|t| parse_f64(t, line)).collect::<Result<_, _>>()?;
                if c.len() < 3 {
                    return Err(parse_err(line, "vertex needs three coordinates"));
                }
                verts.push(Point::new(c[0], c[1], c[2], 0.0));
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        // accept "i/t/n" forms by keeping the position index
                        let head = t.split('/').next().unwrap_or(t);
                        let i: i64 = head
                            .parse()
                            .map_err(|_| parse_err(line, &format!("bad face index `{t}`")))?;
                        let n = verts.len() as i64;
                        let k = if i < 0 { n + i } else { i - 1 };
                        if k < 0 {
                            return Err(parse_err(line, &format!("face index `{t}` out of range")));
                        }
                        Ok(k as usize)
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(line, "face needs three indices"));
                }
                // fan-triangulate polygons
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriMesh::new(3, verts, faces)
}

pub fn export_ply(mesh: &TriMesh) -> String {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", mesh.vertex_count());
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if mesh.dim() == 4 {
        out.push_str("property double w\n");
    }
    for name in mesh.attributes().keys() {
        let _ = writeln!(out, "property double {name}");
    }
    let _ = writeln!(out, "element face {}", mesh.face_count());
    out.push_str("property list uchar int vertex_indices\nend_header\n");
    for (i, v) in mesh.vertices().iter().enumerate() {
        let mut row = vec![num(v.x), num(v.y), num(v.z)];
        if mesh.dim() == 4 {
            row.push(num(v.w));
        }
        for vals in mesh.attributes().values() {
            row.push(num(vals[i]));
        }
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

pub fn import_ply(text: &str) -> Result<TriMesh, MeshError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(1, "missing `ply` magic")),
    }
    let mut n_vert = None;
    let mut n_face = None;
    let mut props: Vec<String> = Vec::new();
    let mut current = String::new();
    loop {
        let (line, l) = lines.next().ok_or_else(|| parse_err(0, "unterminated header"))?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        match tok.as_slice() {
            ["end_header"] => break,
            ["format", fmt, ..] => {
                if *fmt != "ascii" {
                    return Err(parse_err(line, "only ascii PLY is supported"));
                }
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let c: usize = count
                    .parse()
                    .map_err(|_| parse_err(line, "bad element count"))?;
                current = name.to_string();
                match *name {
                    "vertex" => n_vert = Some(c),
                    "face" => n_face = Some(c),
                    _ => return Err(parse_err(line, &format!("unsupported element `{name}`"))),
                }
            }
            ["property", "list", ..] => {
                if current != "face" {
                    return Err(parse_err(line, "list property outside the face element"));
                }
            }
            ["property", _ty, name] => {
                if current == "vertex" {
                    props.push(name.to_string());
                }
            }
            _ => return Err(parse_err(line, &format!("unrecognised header line `{l}`"))),
        }
    }
    let n_vert = n_vert.ok_or_else(|| parse_err(0, "no vertex element"))?;
    let n_face = n_face.unwrap_or(0);
    let pos = |name: &str| props.iter().position(|p| p == name);
    let (ix, iy, iz) = match (pos("x"), pos("y"), pos("z")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(parse_err(0, "vertex element lacks x, y, z")),
    };
    let iw = pos("w");
    let attr_cols: Vec<(usize, &String)> = props
        .iter()
        .enumerate()
        .filter(|(_, p)| !matches!(p.as_str(), "x" | "y" | "z" | "w"))
        .collect();
    let mut verts = Vec::with_capacity(n_vert);
    let mut attrs: Vec<Vec<f64>> = vec![Vec::with_capacity(n_vert); attr_cols.len()];
    for _ in 0..n_vert {
        let (line, l) = lines.next().ok_or_else(|| parse_err(0, "truncated vertex list"))?;
        let row: Vec<f64> = l.split_whitespace().map(|t| parse_f64(t, line)).collect::<Result<_, _>>()?;
        if row.len() != props.len() {
            return Err(parse_err(line, &format!("expected {} values, got {}", props.len(), row.len())));
        }
        verts.push(Point::new(row[ix], row[iy], row[iz], iw.map_or(0.0, |i| row[i])));
        for (slot, (col, _)) in attrs.iter_mut().zip(&attr_cols) {
            slot.push(row[*col]);
        }
    }
    let mut faces = Vec::with_capacity(n_face);
    for _ in 0..n_face {
        let (line, l) = lines.next().ok_or_else(|| parse_err(0, "truncated face list"))?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(line, &format!("bad index `{t}`"))))
            .collect::<Result<_, _>>()?;
        if idx.is_empty() || idx[0] + 1 != idx.len() || idx[0] < 3 {
            return Err(parse_err(line, "malformed face"));
        }
        for k in 2..idx.len() - 1 {
            faces.push([idx[1], idx[k], idx[k + 1]]);
        }
    }
    let dim = if iw.is_some() { 4 } else { 3 };
    let mut mesh = TriMesh::new(dim, verts, faces)?;
    for ((_, name), vals) in attr_cols.into_iter().zip(attrs) {
        mesh.set_attribute(name, vals)?;
    }
    Ok(mesh)
}

/// One `re im [z [w]]` line per point; a final `closed` line closes the curve.
pub fn write_polyline(curve: &Polyline) -> String {
    let mut out = String::new();
    for p in &curve.points {
        let mut row = vec![num(p.x), num(p.y), num(p.z)];
        if curve.dim == 4 {
            row.push(num(p.w));
        }
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    if curve.closed {
        out.push_str("closed\n");
    }
    out
}

/// Points with two coordinates lie in the plane z = 0; any four-coordinate
/// point makes the whole curve four-dimensional.
pub fn read_polyline(text: &str) -> Result<Polyline, MeshError> {
    let mut points = Vec::new();
    let mut closed = false;
    let mut dim = 3;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if closed {
            return Err(parse_err(line, "content after `closed`"));
        }
        if l == "closed" {
            closed = true;
            continue;
        }
        let c: Vec<f64> = l.split_whitespace().map(|t| parse_f64(t, line)).collect::<Result<_, _>>()?;
        let p = match c.len() {
            2 => Point::new(c[0], c[1], 0.0, 0.0),
            3 => Point::new(c[0], c[1], c[2], 0.0),
            4 => {
                dim = 4;
                Point::new(c[0], c[1], c[2], c[3])
            }
            k => return Err(parse_err(line, &format!("expected 2 to 4 coordinates, got {k}"))),
        };
        points.push(p);
    }
    Polyline::new(dim, points, closed)
}

fn parse_f64(t: &str, line: usize) -> Result<f64, MeshError> {
    let v: f64 = t.parse().map_err(|_| parse_err(line, &format!("bad number `{t}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, &format!("non-finite number `{t}`")));
    }
    Ok(v)
}

fn parse_err(line: usize, message: &str) -> MeshError {
    MeshError::Parse {
        line,
        message: message.to_string(),
    }
}

use std::f64::consts::{PI, TAU};

use serde_json::json;

use crate::mesh::{intersects_self, polyline_total_curvature, Point, TriMesh};

use super::{VerificationReport, VerifyError};

const SPHERE_SAMPLES: usize = 4096;

/// Cone density over the boundary against its total curvature, and
/// embeddedness of the interior when the total curvature is below 4π.
///
/// `Θ(C)` is the length of the boundary's radial projection onto the unit
/// sphere about `p`, over 2π. The report fails only if `Θ(C) > TC/2π` or the
/// interior crosses itself under `TC < 4π`.
pub fn eww_diagnostic(mesh: &TriMesh, p: &Point) -> Result<VerificationReport, VerifyError> {
    mesh.require_dim("EWW diagnostic", 3)?;
    let loops = mesh.boundary_polylines();
    if loops.len() != 1 {
        return Err(VerifyError::Invalid(format!(
            "EWW diagnostic needs a single boundary loop, found {}",
            loops.len()
        )));
    }
    let gamma = &loops[0];
    let tc = polyline_total_curvature(gamma)?;
    let scale = mesh.bounding_scale();
    let dirs = gamma
        .resample(SPHERE_SAMPLES)
        .into_iter()
        .map(|q| {
            let d = q - p;
            let n = d.norm();
            if n <= 1e-12 * scale {
                Err(VerifyError::PointOnCurve([p.x, p.y, p.z, p.w]))
            } else {
                Ok(d / n)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let spherical: f64 = (0..dirs.len()).map(|k| (dirs[(k + 1) % dirs.len()] - dirs[k]).norm()).sum();
    let theta_c = spherical / TAU;
    let bound = tc / TAU;
    let excess = (theta_c - bound).max(0.0);

    let mut details = json!({
        "boundary_total_curvature": tc,
        "cone_density": theta_c,
        "cone_density_bound": bound,
    });
    let mut crossing = None;
    if tc < 4.0 * PI {
        let flags = mesh.boundary_flags();
        let interior = mesh.sub_mesh(|_, f| f.iter().all(|&v| !flags[v]));
        crossing = intersects_self(&interior)?;
        details["interior_self_intersection"] = json!(crossing.map(|c| [c.faces.0, c.faces.1]));
    }
    let mut report = VerificationReport::informative("eww", theta_c, bound, excess, details);
    if excess > 1e-9 * bound.max(1.0) || crossing.is_some() {
        report.verdict = super::Verdict::Fail;
    }
    Ok(report)
}

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::PathSegment;

use super::WeierstrassError;

/// Straight segment from `from` to `to`, with a circular detour around every
/// puncture the segment passes close to.
///
/// A puncture's detour radius is half its distance to the nearest other
/// puncture or path endpoint, so detours never overlap and never swallow an
/// endpoint. The detour takes the shorter arc; a segment running straight
/// through a puncture goes around it counter-clockwise.
pub fn build_path(from: Complex64, to: Complex64, punctures: &[Complex64]) -> Result<Vec<PathSegment>, WeierstrassError> {
    if from == to {
        return Ok(Vec::new());
    }
    let d = to - from;
    let len2 = d.norm_sqr();
    let scale = from.norm().max(to.norm()).max(1.0);
    let mut detours: Vec<(f64, Complex64, Complex64, Complex64, f64)> = Vec::new();
    for (k, &p) in punctures.iter().enumerate() {
        let end_dist = (p - from).norm().min((p - to).norm());
        if end_dist == 0.0 {
            return Err(WeierstrassError::PathConstruction {
                from,
                to,
                reason: format!("endpoint coincides with puncture {p}"),
            });
        }
        let other = punctures
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, q)| (p - q).norm())
            .fold(f64::INFINITY, f64::min);
        let rho = 0.5 * end_dist.min(other);
        let t = ((p - from) * d.conj()).re / len2;
        let foot = from + d * t.clamp(0.0, 1.0);
        if (p - foot).norm() >= rho {
            continue;
        }
        if rho < 1e-12 * scale {
            return Err(WeierstrassError::PathConstruction {
                from,
                to,
                reason: format!("puncture {p} is too close to an endpoint or another puncture"),
            });
        }
        // |from + s d - p|² = rho²; both roots lie in (0, 1) because the
        // endpoints are at least 2·rho from p
        let a = len2;
        let b = 2.0 * ((from - p) * d.conj()).re;
        let c = (from - p).norm_sqr() - rho * rho;
        let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
        let s_in = (-b - disc) / (2.0 * a);
        let s_out = (-b + disc) / (2.0 * a);
        detours.push((s_in, from + d * s_in, from + d * s_out, p, rho));
    }
    detours.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    let mut path = Vec::with_capacity(2 * detours.len() + 1);
    let mut cur = from;
    for (_, entry, exit, center, radius) in detours {
        path.push(PathSegment::Line { from: cur, to: entry });
        let start = (entry - center).arg();
        let mut sweep = (exit - center).arg() - start;
        while sweep > PI {
            sweep -= 2.0 * PI;
        }
        while sweep <= -PI {
            sweep += 2.0 * PI;
        }
        if sweep.abs() > PI - 1e-9 {
            sweep = PI;
        }
        path.push(PathSegment::Arc {
            center,
            radius,
            start,
            end: start + sweep,
        });
        cur = exit;
    }
    path.push(PathSegment::Line { from: cur, to });
    Ok(path)
}

use crate::expr::ComplexExpr;
use crate::mesh::{Point, Polyline, TriMesh};

use super::PlateauError;

/// Samples used to test a parametric curve for self-intersection.
const SIMPLICITY_SAMPLES: usize = 512;

/// A closed Jordan curve in R³ or R⁴ with a periodic parameter.
///
/// Polylines are parametrized by vertex index: point `k` sits at `t = k` and
/// the period is the number of points. Parametric curves are given by real
/// expressions in `t` with an explicit period.
#[derive(Debug, Clone)]
pub enum BoundaryCurve {
    Polyline(Polyline),
    Parametric {
        exprs: Vec<ComplexExpr>,
        derivs: Vec<ComplexExpr>,
        period: f64,
    },
}

impl BoundaryCurve {
    pub fn polyline(curve: Polyline) -> Result<Self, PlateauError> {
        if !curve.closed {
            return Err(PlateauError::NotSingleCurve);
        }
        if curve.points.len() < 3 {
            return Err(PlateauError::InvalidProblem("a closed curve needs at least 3 points".into()));
        }
        let out = BoundaryCurve::Polyline(curve);
        out.check_simple()?;
        Ok(out)
    }

    /// Curve `(x(t), y(t), z(t)[, w(t)])` of period `period`.
    pub fn parametric(components: &[&str], period: f64) -> Result<Self, PlateauError> {
        if !(3..=4).contains(&components.len()) {
            return Err(PlateauError::InvalidProblem(format!(
                "a curve needs 3 or 4 coordinate expressions, got {}",
                components.len()
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(PlateauError::InvalidProblem(format!("period must be positive, got {period}")));
        }
        let exprs = components
            .iter()
            .map(|c| ComplexExpr::parse_with_vars(c, &["t"]))
            .collect::<Result<Vec<_>, _>>()?;
        let derivs = exprs.iter().map(|e| e.partial(0)).collect();
        let out = BoundaryCurve::Parametric { exprs, derivs, period };
        let first = out.eval(0.0)?;
        let last = out.eval(period)?;
        if (first - last).norm() > 1e-9 * (1.0 + first.norm()) {
            return Err(PlateauError::NotSingleCurve);
        }
        out.check_simple()?;
        Ok(out)
    }

    /// The boundary of a mesh, which must consist of exactly one loop.
    pub fn from_mesh_boundary(mesh: &TriMesh) -> Result<Self, PlateauError> {
        let mut loops = mesh.boundary_polylines();
        if loops.len() != 1 {
            return Err(PlateauError::NotSingleCurve);
        }
        Self::polyline(loops.remove(0))
    }

    pub fn period(&self) -> f64 {
        match self {
            BoundaryCurve::Polyline(p) => p.points.len() as f64,
            BoundaryCurve::Parametric { period, .. } => *period,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BoundaryCurve::Polyline(p) => p.dim,
            BoundaryCurve::Parametric { exprs, .. } => exprs.len(),
        }
    }

    fn segment(&self, t: f64) -> (usize, f64) {
        let BoundaryCurve::Polyline(p) = self else { unreachable!() };
        let n = p.points.len();
        let u = t.rem_euclid(n as f64);
        let k = (u.floor() as usize).min(n - 1);
        (k, u - k as f64)
    }

    fn eval_exprs(exprs: &[ComplexExpr], t: f64) -> Result<Point, PlateauError> {
        let mut out = Point::zeros();
        for (c, e) in exprs.iter().enumerate() {
            out[c] = e.eval_real(&[t])?;
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(PlateauError::NonFinite(format!("curve point at t = {t}")))
        }
    }

    pub fn eval(&self, t: f64) -> Result<Point, PlateauError> {
        match self {
            BoundaryCurve::Polyline(p) => {
                let (k, f) = self.segment(t);
                let n = p.points.len();
                Ok(p.points[k] * (1.0 - f) + p.points[(k + 1) % n] * f)
            }
            BoundaryCurve::Parametric { exprs, .. } => Self::eval_exprs(exprs, t),
        }
    }

    /// `dγ/dt`; on a polyline, the direction of the segment starting at or after `t`.
    pub fn tangent(&self, t: f64) -> Result<Point, PlateauError> {
        match self {
            BoundaryCurve::Polyline(p) => {
                let (k, _) = self.segment(t);
                let n = p.points.len();
                Ok(p.points[(k + 1) % n] - p.points[k])
            }
            BoundaryCurve::Parametric { derivs, .. } => Self::eval_exprs(derivs, t),
        }
    }

    fn vertices(&self) -> Result<Vec<Point>, PlateauError> {
        match self {
            BoundaryCurve::Polyline(p) => Ok(p.points.clone()),
            BoundaryCurve::Parametric { period, .. } => (0..SIMPLICITY_SAMPLES)
                .map(|k| self.eval(period * k as f64 / SIMPLICITY_SAMPLES as f64))
                .collect(),
        }
    }

    /// Reject curves whose non-adjacent segments come closer than a tiny
    /// fraction of the curve's size.
    fn check_simple(&self) -> Result<(), PlateauError> {
        let pts = self.vertices()?;
        let n = pts.len();
        let scale = pts.iter().map(|p| (p - pts[0]).norm()).fold(0.0, f64::max);
        let eps = 1e-9 * scale.max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let d = segment_distance(&pts[i], &pts[(i + 1) % n], &pts[j], &pts[(j + 1) % n]);
                if d <= eps {
                    return Err(PlateauError::SelfIntersecting(i, j));
                }
            }
        }
        Ok(())
    }
}

/// Distance between segments `[p0, p1]` and `[q0, q1]` in any dimension.
pub(crate) fn segment_distance(p0: &Point, p1: &Point, q0: &Point, q1: &Point) -> f64 {
    let u = p1 - p0;
    let v = q1 - q0;
    let w = p0 - q0;
    let (a, b, c, d, e) = (u.dot(&u), u.dot(&v), v.dot(&v), u.dot(&w), v.dot(&w));
    let den = a * c - b * b;
    // minimize over s for fixed t clamps, then re-solve t; covers parallel segments
    let mut s = if den > 1e-14 * a * c { ((b * e - c * d) / den).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = if c > 0.0 { ((b * s + e) / c).clamp(0.0, 1.0) } else { 0.0 };
    if a > 0.0 {
        s = ((b * t - d) / a).clamp(0.0, 1.0);
    }
    if c > 0.0 {
        t = ((b * s + e) / c).clamp(0.0, 1.0);
    }
    let mut best = (p0 + u * s - q0 - v * t).norm();
    // endpoint checks guard the clamped alternation against corner cases
    for (x, y0, y1) in [(p0, q0, q1), (p1, q0, q1), (q0, p0, p1), (q1, p0, p1)] {
        let r = y1 - y0;
        let rr = r.dot(&r);
        let k = if rr > 0.0 { ((x - y0).dot(&r) / rr).clamp(0.0, 1.0) } else { 0.0 };
        best = best.min((x - y0 - r * k).norm());
    }
    best
}

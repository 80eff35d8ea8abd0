use super::{MeshError, Point};

/// Ordered points in R³ or R⁴; `closed` joins the last point back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub dim: usize,
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Polyline {
    pub fn new(dim: usize, points: Vec<Point>, closed: bool) -> Result<Self, MeshError> {
        if dim != 3 && dim != 4 {
            return Err(MeshError::UnsupportedDimension(dim));
        }
        let n = points.len();
        for i in 0..n {
            let j = i + 1;
            if j == n && !closed {
                break;
            }
            if points[i] == points[j % n] && n > 1 {
                return Err(MeshError::RepeatedPoint(i, j % n));
            }
        }
        Ok(Self { dim, points, closed })
    }

    /// Iterator over edges as point pairs.
    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }

    /// Resample by arclength to `n` points (closed polylines only).
    pub fn resample(&self, n: usize) -> Vec<Point> {
        let segs: Vec<(Point, Point)> = self.segments().collect();
        let total = self.length();
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        let mut acc = 0.0;
        for k in 0..n {
            let target = total * k as f64 / n as f64;
            while seg + 1 < segs.len() && acc + (segs[seg].1 - segs[seg].0).norm() < target {
                acc += (segs[seg].1 - segs[seg].0).norm();
                seg += 1;
            }
            let (a, b) = segs[seg];
            let len = (b - a).norm();
            let t = if len > 0.0 { ((target - acc) / len).clamp(0.0, 1.0) } else { 0.0 };
            out.push(a + (b - a) * t);
        }
        out
    }
}

/// Sum of exterior turning angles between consecutive edge directions of a
/// closed polyline.
pub fn polyline_total_curvature(curve: &Polyline) -> Result<f64, MeshError> {
    let n = curve.points.len();
    if n < 3 {
        return Err(MeshError::ShortPolyline { needed: 3, got: n });
    }
    let dirs: Vec<Point> = curve.segments().map(|(a, b)| b - a).collect();
    let m = dirs.len();
    let mut total = 0.0;
    let last = if curve.closed { m } else { m - 1 };
    for i in 0..last {
        let u = dirs[i];
        let v = dirs[(i + 1) % m];
        let uu = u.dot(&u);
        let vv = v.dot(&v);
        let uv = u.dot(&v);
        total += (uu * vv - uv * uv).max(0.0).sqrt().atan2(uv);
    }
    Ok(total)
}

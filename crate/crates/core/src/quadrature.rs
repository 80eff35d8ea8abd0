//! Adaptive composite Gauss–Legendre quadrature along complex paths.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::ExprError;

/// Nodes per panel.
pub const GL_NODES: usize = 16;
/// Relative change between a panel and its two halves below which the panel is accepted.
pub const GL_REL_TOL: f64 = 1e-10;
const MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge below relative change {tol:e} on [{t0}, {t1}]")]
    NoConvergence { tol: f64, t0: f64, t1: f64 },
    #[error(transparent)]
    Integrand(#[from] ExprError),
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(GL_NODES))
    }

    /// Integrate a real function over [a, b] with a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

impl GaussLegendre {
    /// Adaptive bisection on [a, b] until each panel's two-half refinement
    /// changes it by less than `rel_tol` relative.
    pub fn integrate_adaptive<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F, rel_tol: f64) -> Result<f64, QuadError> {
        let mut total = 0.0;
        let mut stack = vec![(a, b, self.integrate(a, b, &f), 0u32)];
        while let Some((t0, t1, estimate, depth)) = stack.pop() {
            let tm = 0.5 * (t0 + t1);
            let left = self.integrate(t0, tm, &f);
            let right = self.integrate(tm, t1, &f);
            let refined = left + right;
            if !refined.is_finite() {
                return Err(QuadError::NoConvergence { tol: rel_tol, t0, t1 });
            }
            if (refined - estimate).abs() <= rel_tol * refined.abs().max(f64::MIN_POSITIVE) {
                total += refined;
            } else if depth >= MAX_DEPTH {
                return Err(QuadError::NoConvergence { tol: rel_tol, t0, t1 });
            } else {
                stack.push((tm, t1, right, depth + 1));
                stack.push((t0, tm, left, depth + 1));
            }
        }
        Ok(total)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A piece of an integration path in the complex plane, parametrized by t in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathSegment {
    Line { from: Complex64, to: Complex64 },
    Arc { center: Complex64, radius: f64, start: f64, end: f64 },
}

impl PathSegment {
    pub fn point(&self, t: f64) -> Complex64 {
        match *self {
            PathSegment::Line { from, to } => from + (to - from) * t,
            PathSegment::Arc { center, radius, start, end } => {
                center + Complex64::from_polar(radius, start + (end - start) * t)
            }
        }
    }

    pub fn velocity(&self, t: f64) -> Complex64 {
        match *self {
            PathSegment::Line { from, to } => to - from,
            PathSegment::Arc { radius, start, end, .. } => {
                let ang = start + (end - start) * t;
                Complex64::new(0.0, 1.0) * Complex64::from_polar(radius, ang) * (end - start)
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            PathSegment::Line { from, to } => (to - from).norm(),
            PathSegment::Arc { radius, start, end, .. } => radius * (end - start).abs(),
        }
    }

    /// Smallest distance from `p` to any point of the segment.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        match *self {
            PathSegment::Line { from, to } => {
                let d = to - from;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (p - from).norm();
                }
                let t = (((p - from) * d.conj()).re / len2).clamp(0.0, 1.0);
                (p - (from + d * t)).norm()
            }
            PathSegment::Arc { center, radius, start, end } => {
                let rel = p - center;
                let ang = rel.arg();
                let (lo, hi) = if start <= end { (start, end) } else { (end, start) };
                let mut best = (self.start() - p).norm().min((self.end() - p).norm());
                // check whether the direction of p falls inside the swept angle range
                let mut a = ang;
                while a < lo {
                    a += 2.0 * PI;
                }
                if a <= hi {
                    best = best.min((rel.norm() - radius).abs());
                }
                best
            }
        }
    }
}

/// Integrate `f(w) dw` along a path segment. `f` returns `N` complex components.
pub fn integrate_segment<const N: usize, F>(
    seg: &PathSegment,
    f: &F,
) -> Result<[Complex64; N], QuadError>
where
    F: Fn(Complex64) -> Result<[Complex64; N], ExprError>,
{
    let rule = GaussLegendre::standard();
    let panel = |t0: f64, t1: f64| -> Result<([Complex64; N], f64), QuadError> {
        let half = 0.5 * (t1 - t0);
        let mid = 0.5 * (t0 + t1);
        let mut acc = [Complex64::new(0.0, 0.0); N];
        let mut mag = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let t = mid + half * x;
            let vel = seg.velocity(t);
            let vals = f(seg.point(t))?;
            for k in 0..N {
                let c = vals[k] * vel * (w * half);
                acc[k] += c;
                mag += c.norm();
            }
        }
        Ok((acc, mag))
    };

    let mut total = [Complex64::new(0.0, 0.0); N];
    let (whole, _) = panel(0.0, 1.0)?;
    let mut stack = vec![(0.0, 1.0, whole, 0u32)];
    while let Some((t0, t1, estimate, depth)) = stack.pop() {
        let tm = 0.5 * (t0 + t1);
        let (left, lmag) = panel(t0, tm)?;
        let (right, rmag) = panel(tm, t1)?;
        let mut diff = 0.0;
        let mut norm = 0.0;
        for k in 0..N {
            let refined = left[k] + right[k];
            diff += (refined - estimate[k]).norm();
            norm += refined.norm();
        }
        let scale = norm.max(1e-3 * (lmag + rmag)).max(f64::MIN_POSITIVE);
        if diff <= GL_REL_TOL * scale || diff < 1e-15 * (lmag + rmag) {
            for k in 0..N {
                total[k] += left[k] + right[k];
            }
        } else if depth >= MAX_DEPTH {
            return Err(QuadError::NoConvergence {
                tol: GL_REL_TOL,
                t0,
                t1,
            });
        } else {
            stack.push((tm, t1, right, depth + 1));
            stack.push((t0, tm, left, depth + 1));
        }
    }
    Ok(total)
}

pub fn integrate_path<const N: usize, F>(
    path: &[PathSegment],
    f: &F,
) -> Result<[Complex64; N], QuadError>
where
    F: Fn(Complex64) -> Result<[Complex64; N], ExprError>,
{
    let mut total = [Complex64::new(0.0, 0.0); N];
    for seg in path {
        let part = integrate_segment(seg, f)?;
        for k in 0..N {
            total[k] += part[k];
        }
    }
    Ok(total)
}

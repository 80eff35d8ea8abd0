use nalgebra::{Matrix3, Vector3};

/// Best fit of `(x − a)² + (y − b)² = cosh²(z − c)`, the unit-neck catenoid
/// with vertical axis through `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatenoidFit {
    pub axis: (f64, f64),
    pub offset: f64,
    /// max over points of `|ρ² − cosh²(z − c)| / ρ²`
    pub residual: f64,
}

/// For fixed `c` the axis enters linearly, so it is solved by least squares;
/// `c` itself is found by golden-section search over the height range.
pub fn fit_vertical_catenoid(points: &[Vector3<f64>]) -> CatenoidFit {
    let axis_for = |c: f64| -> (f64, f64, f64) {
        // x² + y² − cosh²(z − c) = 2a·x + 2b·y + e
        let mut ata = Matrix3::zeros();
        let mut atb = Vector3::zeros();
        for p in points {
            let row = Vector3::new(2.0 * p.x, 2.0 * p.y, 1.0);
            let rhs = p.x * p.x + p.y * p.y - (p.z - c).cosh().powi(2);
            ata += row * row.transpose();
            atb += row * rhs;
        }
        let sol = ata.lu().solve(&atb).unwrap_or_else(Vector3::zeros);
        let cost = points
            .iter()
            .map(|p| {
                let rhs = p.x * p.x + p.y * p.y - (p.z - c).cosh().powi(2);
                (rhs - 2.0 * sol.x * p.x - 2.0 * sol.y * p.y - sol.z).powi(2)
            })
            .sum();
        (sol.x, sol.y, cost)
    };
    let (mut lo, mut hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.z), h.max(p.z)));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let m1 = hi - ratio * (hi - lo);
        let m2 = lo + ratio * (hi - lo);
        if axis_for(m1).2 < axis_for(m2).2 {
            hi = m2;
        } else {
            lo = m1;
        }
        if hi - lo < 1e-14 * (1.0 + lo.abs()) {
            break;
        }
    }
    let c = 0.5 * (lo + hi);
    let (a, b, _) = axis_for(c);
    let residual = points
        .iter()
        .map(|p| {
            let rho2 = (p.x - a).powi(2) + (p.y - b).powi(2);
            (rho2 - (p.z - c).cosh().powi(2)).abs() / rho2
        })
        .fold(0.0, f64::max);
    CatenoidFit {
        axis: (a, b),
        offset: c,
        residual,
    }
}

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::mesh::Point;

use super::{energy, DiskMesh, PlateauError};

pub const CL_RADII: usize = 64;

/// Slack allowed for discretization when judging the two inequalities.
const SLACK: f64 = 1.05;

/// Image lengths `L(r)` of parameter circles around a point and the two
/// Courant–Lebesgue bounds.
#[derive(Debug, Clone, Serialize)]
pub struct CourantLebesgueReport {
    pub center: [f64; 2],
    pub radii: Vec<f64>,
    pub lengths: Vec<f64>,
    pub energy: f64,
    /// Midpoint-rule `∫ L(r)²/r dr` and its bound `4πE`.
    pub integral: f64,
    pub integral_bound: f64,
    /// Largest `min_{a≤r≤b} L(r)² · ln(b/a) / (4πE)` over sampled `a < b`.
    pub worst_min_ratio: f64,
    pub worst_interval: [f64; 2],
    /// `1 − max(integral/bound, worst_min_ratio)`; positive when both hold.
    pub margin: f64,
    pub holds: bool,
}

/// Measure image circle lengths around `p` at [`CL_RADII`] radii and test
/// `∫ L²/r dr ≤ 4πE` and `min L(r)² ≤ 4πE / ln(b/a)` on every sampled interval.
pub fn courant_lebesgue_check(disk: &DiskMesh, positions: &[Point], p: [f64; 2]) -> Result<CourantLebesgueReport, PlateauError> {
    let dist = (p[0] * p[0] + p[1] * p[1]).sqrt();
    if dist >= 1.0 {
        return Err(PlateauError::InvalidProblem(format!("center {p:?} is not inside the unit disk")));
    }
    // stay inside the inscribed boundary polygon
    let r_max = (1.0 - dist) * (PI / disk.n_boundary() as f64).cos() * (1.0 - 1e-9);
    let samples = 8 * disk.n_boundary();
    let dr = r_max / CL_RADII as f64;
    let radii: Vec<f64> = (0..CL_RADII).map(|i| (i as f64 + 0.5) * dr).collect();
    let mut lengths = Vec::with_capacity(CL_RADII);
    for &r in &radii {
        let pts = (0..samples)
            .map(|k| {
                let a = TAU * k as f64 / samples as f64;
                disk.interpolate(positions, p[0] + r * a.cos(), p[1] + r * a.sin())
                    .ok_or_else(|| PlateauError::InvalidProblem(format!("circle of radius {r} leaves the disk")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        lengths.push((0..samples).map(|k| (pts[(k + 1) % samples] - pts[k]).norm()).sum());
    }
    let e = energy(disk, positions);
    let bound = 4.0 * PI * e;
    let integral: f64 = radii.iter().zip(&lengths).map(|(r, l)| l * l / r * dr).sum();
    let mut worst = 0.0;
    let mut worst_interval = [radii[0], radii[CL_RADII - 1]];
    for i in 0..CL_RADII {
        let mut min_sq = f64::INFINITY;
        for j in i..CL_RADII {
            min_sq = min_sq.min(lengths[j] * lengths[j]);
            if j == i {
                continue;
            }
            let ratio = min_sq * (radii[j] / radii[i]).ln() / bound;
            if ratio > worst {
                worst = ratio;
                worst_interval = [radii[i], radii[j]];
            }
        }
    }
    let worst_ratio = (integral / bound).max(worst);
    Ok(CourantLebesgueReport {
        center: p,
        radii,
        lengths,
        energy: e,
        integral,
        integral_bound: bound,
        worst_min_ratio: worst,
        worst_interval,
        margin: 1.0 - worst_ratio,
        holds: worst_ratio <= SLACK,
    })
}

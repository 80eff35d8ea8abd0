use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mesh::{Point, TriMesh};

use super::{conformality_residual, energy, harmonic_extend, image_mesh, map_area, BoundaryProblem, DiskMesh, PlateauError};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlateauConfig {
    /// Stop when one step lowers the energy by less than `tol·E`.
    pub tol: f64,
    pub max_iters: usize,
    /// Smallest allowed gap between consecutive boundary parameters, as a
    /// fraction of the uniform spacing `T/N_b`.
    pub min_gap: f64,
    /// Amplitude of a random monotone warp of the initial parametrization, in [0, 1/3).
    pub skew: f64,
    pub seed: u64,
    /// Independent runs; restarts after the first use seeds `seed + k` and a
    /// skew of at least 0.2. The lowest final energy wins.
    pub restarts: usize,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 5000,
            min_gap: 1e-4,
            skew: 0.0,
            seed: 0,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlateauState {
    /// Boundary parameters, lifted so they increase from the first anchor.
    pub s: Vec<f64>,
    pub positions: Vec<Point>,
    pub dim: usize,
    pub energy: f64,
    pub area: f64,
    pub conformality_residual: Vec<(f64, f64)>,
    pub iteration: usize,
    pub converged: bool,
    pub energy_history: Vec<f64>,
    pub area_history: Vec<f64>,
    /// The enforced minimum parameter gap, and how many gaps sit on it.
    pub gap_floor: f64,
    pub gaps_at_floor: usize,
    pub restart: usize,
    /// One entry per run, in restart order.
    pub runs: Vec<RunSummary>,
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub skew: f64,
    pub energy: f64,
    pub area: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl PlateauState {
    /// `E − A`, zero exactly for conformal maps.
    pub fn gap(&self) -> f64 {
        self.energy - self.area
    }

    pub fn relative_gap(&self) -> f64 {
        self.gap() / self.energy
    }

    pub fn mesh(&self, disk: &DiskMesh) -> Result<TriMesh, PlateauError> {
        image_mesh(disk, &self.positions, self.dim)
    }
}

fn pins(n: usize) -> [usize; 3] {
    [0, n / 3, 2 * n / 3]
}

/// Least-squares nondecreasing fit (pool adjacent violators).
fn isotonic(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let c = c1 + c2;
            *blocks.last_mut().unwrap() = ((m1 * c1 as f64 + m2 * c2 as f64) / c as f64, c);
        }
    }
    blocks.into_iter().flat_map(|(m, c)| std::iter::repeat_n(m, c)).collect()
}

struct Arcs {
    pins: [usize; 3],
    values: [f64; 3],
    period: f64,
    delta: f64,
}

impl Arcs {
    /// `(start index, start value, end index, end value)` for each arc, the
    /// last ending at the first anchor one period later.
    fn spans(&self, n: usize) -> [(usize, f64, usize, f64); 3] {
        let [p0, p1, p2] = self.pins;
        let [a0, a1, a2] = self.values;
        [(p0, a0, p1, a1), (p1, a1, p2, a2), (p2, a2, n, a0 + self.period)]
    }

    /// Euclidean projection onto parameters that increase by at least `delta`
    /// per step and hit the anchors. With `u_k = s_k − (k − p)δ` on an arc from
    /// `p` to `q` this is a bounded isotonic regression, which is the
    /// unbounded one clamped to the bounds.
    fn project(&self, s: &mut [f64]) {
        let n = s.len();
        for (p, sp, q, sq) in self.spans(n) {
            let lo = sp;
            let hi = sq - (q - p) as f64 * self.delta;
            let u: Vec<f64> = (p + 1..q).map(|k| s[k] - (k - p) as f64 * self.delta).collect();
            for (k, v) in (p + 1..q).zip(isotonic(&u)) {
                s[k] = v.clamp(lo, hi) + (k - p) as f64 * self.delta;
            }
        }
        for (&k, &v) in self.pins.iter().zip(&self.values) {
            s[k] = v;
        }
    }

    fn gaps_at_floor(&self, s: &[f64]) -> usize {
        let n = s.len();
        (0..n)
            .filter(|&k| {
                let next = if k + 1 < n { s[k + 1] } else { s[0] + self.period };
                next - s[k] <= self.delta * (1.0 + 1e-9)
            })
            .count()
    }
}

struct Run<'a> {
    disk: &'a DiskMesh,
    problem: &'a BoundaryProblem,
}

impl Run<'_> {
    fn evaluate(&self, s: &[f64]) -> Result<(f64, Vec<Point>), PlateauError> {
        let boundary = s.iter().map(|&t| self.problem.curve.eval(t)).collect::<Result<Vec<_>, _>>()?;
        let pos = harmonic_extend(self.disk, &boundary)?;
        Ok((energy(self.disk, &pos), pos))
    }

    /// `dE/ds`. Interior positions are harmonic, so `∂E/∂F_I = 0` and the
    /// total derivative reduces to `∂E/∂F_B · γ'(s)`.
    fn gradient(&self, s: &[f64], pos: &[Point], pinned: &[usize; 3]) -> Result<Vec<f64>, PlateauError> {
        let ni = self.disk.n_interior();
        let mut gf = vec![Point::zeros(); s.len()];
        for &((i, j), w) in self.disk.weights() {
            let d = (pos[i] - pos[j]) * w;
            if i >= ni {
                gf[i - ni] += d;
            }
            if j >= ni {
                gf[j - ni] -= d;
            }
        }
        let mut g = Vec::with_capacity(s.len());
        for (k, &t) in s.iter().enumerate() {
            g.push(if pinned.contains(&k) { 0.0 } else { gf[k].dot(&self.problem.curve.tangent(t)?) });
        }
        Ok(g)
    }

    fn initial(&self, arcs: &Arcs, skew: f64, seed: u64) -> Vec<f64> {
        let n = self.disk.n_boundary();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = vec![0.0; n];
        for (p, sp, q, sq) in arcs.spans(n) {
            let c: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            for k in p..q {
                let x = (k - p) as f64 / (q - p) as f64;
                // derivative 1 + skew·Σ c_m cos(mπx) stays positive for skew < 1/3
                let warp: f64 = (1..=3).map(|m| c[m - 1] * (m as f64 * PI * x).sin() / (m as f64 * PI)).sum();
                s[k] = sp + (sq - sp) * (x + skew * warp);
            }
        }
        arcs.project(&mut s);
        s
    }

    fn run(&self, config: &PlateauConfig, arcs: &Arcs, skew: f64, seed: u64) -> Result<PlateauState, PlateauError> {
        let pinned = arcs.pins;
        let mut s = self.initial(arcs, skew, seed);
        let (mut e, mut pos) = self.evaluate(&s)?;
        let mut g = self.gradient(&s, &pos, &pinned)?;
        let mut energy_history = vec![e];
        let mut area_history = vec![map_area(self.disk, &pos)];
        let spacing = arcs.period / s.len() as f64;
        let gmax = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut alpha = if gmax > 0.0 { 0.1 * spacing / gmax } else { 0.0 };
        let mut converged = gmax == 0.0;
        let mut iteration = 0;
        while !converged && iteration < config.max_iters {
            let mut step = alpha;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let mut trial: Vec<f64> = s.iter().zip(&g).map(|(x, d)| x - step * d).collect();
                arcs.project(&mut trial);
                let descent: f64 = g.iter().zip(trial.iter().zip(&s)).map(|(d, (a, b))| d * (a - b)).sum();
                if descent >= 0.0 {
                    break;
                }
                let (e_new, pos_new) = self.evaluate(&trial)?;
                if e_new <= e + ARMIJO * descent {
                    accepted = Some((trial, e_new, pos_new));
                    break;
                }
                step *= 0.5;
            }
            let Some((s_new, e_new, pos_new)) = accepted else {
                // no projected descent direction is left
                converged = true;
                break;
            };
            iteration += 1;
            let g_new = self.gradient(&s_new, &pos_new, &pinned)?;
            let (mut ss, mut sy) = (0.0, 0.0);
            for k in 0..s.len() {
                let ds = s_new[k] - s[k];
                ss += ds * ds;
                sy += ds * (g_new[k] - g[k]);
            }
            alpha = if sy > 0.0 { ss / sy } else { 2.0 * step };
            let decrease = e - e_new;
            s = s_new;
            e = e_new;
            pos = pos_new;
            g = g_new;
            energy_history.push(e);
            area_history.push(map_area(self.disk, &pos));
            if decrease < config.tol * e {
                converged = true;
            }
        }
        let area = map_area(self.disk, &pos);
        Ok(PlateauState {
            gaps_at_floor: arcs.gaps_at_floor(&s),
            gap_floor: arcs.delta,
            conformality_residual: conformality_residual(self.disk, &pos),
            dim: self.problem.dim(),
            s,
            positions: pos,
            energy: e,
            area,
            iteration,
            converged,
            energy_history,
            area_history,
            restart: 0,
            runs: Vec::new(),
        })
    }
}

/// Minimize the Dirichlet energy of harmonic extensions over monotone
/// boundary parametrizations with the three anchors pinned.
///
/// A run that hits `max_iters` returns its last state with `converged = false`.
pub fn solve(problem: &BoundaryProblem, disk: &DiskMesh, config: &PlateauConfig) -> Result<PlateauState, PlateauError> {
    if !(0.0..1.0 / 3.0).contains(&config.skew) {
        return Err(PlateauError::InvalidProblem(format!("skew must lie in [0, 1/3), got {}", config.skew)));
    }
    if !(config.min_gap > 0.0 && config.min_gap < 1.0) || !(config.tol >= 0.0) {
        return Err(PlateauError::InvalidProblem("min_gap must lie in (0, 1) and tol must be nonnegative".into()));
    }
    let n = disk.n_boundary();
    let period = problem.curve.period();
    let arcs = Arcs {
        pins: pins(n),
        values: problem.unwrapped_anchors()?,
        period,
        delta: config.min_gap * period / n as f64,
    };
    for (p, sp, q, sq) in arcs.spans(n) {
        if sq - sp < (q - p) as f64 * arcs.delta {
            return Err(PlateauError::Anchors(format!(
                "arc from {sp} to {sq} cannot hold {} vertices at the minimum gap",
                q - p
            )));
        }
    }
    let run = Run { disk, problem };
    let skew_of = |k: usize| if k == 0 { config.skew } else { config.skew.max(0.2) };
    let results: Vec<Result<PlateauState, PlateauError>> = (0..config.restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut st = run.run(config, &arcs, skew_of(k), config.seed.wrapping_add(k as u64))?;
            st.restart = k;
            Ok(st)
        })
        .collect();
    let mut best: Option<PlateauState> = None;
    let mut runs = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        let st = r?;
        runs.push(RunSummary {
            seed: config.seed.wrapping_add(k as u64),
            skew: skew_of(k),
            energy: st.energy,
            area: st.area,
            iterations: st.iteration,
            converged: st.converged,
        });
        if best.as_ref().is_none_or(|b| st.energy < b.energy) {
            best = Some(st);
        }
    }
    let mut best = best.expect("at least one run");
    best.runs = runs;
    Ok(best)
}

//! Stagnation depths: solutions of `|kA e^Z| = |kcZ - β|`.
//!
//! The absolute values are split into two smooth branches
//! `f±(Z) = |kA| e^Z ∓ (kcZ - β)`. A root of `f+` automatically has
//! `kcZ - β > 0` and a root of `f-` has `kcZ - β < 0`, so every branch root
//! is a genuine solution. Each branch is convex, so together they give at
//! most three solutions.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::trajectories::TrajectorySeries;
use crate::wave_field::WaveParams;

pub const DEFAULT_Z_MIN: f64 = -20.0;
pub const DEFAULT_Z_MAX: f64 = 5.0;
pub const MIN_GRID: usize = 1000;

const ROOT_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-9;
const TANGENCY_TOL: f64 = 1e-8;
const ON_TRAJECTORY_TOL: f64 = 1e-6;

/// Coefficients of the stagnation equation `|kA| e^Z = |kcZ - β|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagnationProblem {
    /// `|kA|`
    pub ka_abs: f64,
    /// `kc`
    pub kc: f64,
    pub beta: f64,
}

impl StagnationProblem {
    pub fn from_params(params: &WaveParams, beta: f64) -> Self {
        let k = params.k();
        Self {
            ka_abs: (k * params.amplitude_a()).abs(),
            kc: k * params.c(),
            beta,
        }
    }

    /// Direct coefficients, bypassing the dispersion relation.
    pub fn direct(ka: f64, kc: f64, beta: f64) -> Self {
        Self {
            ka_abs: ka.abs(),
            kc,
            beta,
        }
    }

    fn branch(&self, z: f64, sign: f64) -> f64 {
        self.ka_abs * z.exp() - sign * (self.kc * z - self.beta)
    }

    fn branch_slope(&self, z: f64, sign: f64) -> f64 {
        self.ka_abs * z.exp() - sign * self.kc
    }

    /// `| |kA| e^Z - |kcZ - β| |`, evaluated with the absolute values.
    pub fn residual(&self, z: f64) -> f64 {
        (self.ka_abs * z.exp() - (self.kc * z - self.beta).abs()).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagnationSolution {
    pub z_star: f64,
    /// `+1` when `|kA| e^Z = kcZ - β`, `-1` when `|kA| e^Z = -(kcZ - β)`.
    pub branch: i8,
    pub residual: f64,
    /// Double root: the branch function and its slope vanish together.
    pub tangent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagnationReport {
    pub solutions: Vec<StagnationSolution>,
    pub search_interval: (f64, f64),
    pub grid_size: usize,
}

impl StagnationReport {
    pub fn count(&self) -> usize {
        self.solutions.len()
    }

    pub fn has_tangency(&self) -> bool {
        self.solutions.iter().any(|s| s.tangent)
    }
}

/// Safeguarded Newton inside a sign-change bracket.
fn hybrid_root(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fa.signum() == fx.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        if (b - a).abs() <= ROOT_TOL * x.abs().max(1.0) {
            break;
        }
        let slope = df(x);
        let newton = x - fx / slope;
        x = if slope != 0.0 && newton > a.min(b) && newton < a.max(b) {
            newton
        } else {
            0.5 * (a + b)
        };
    }
    x
}

/// Minimiser of a convex branch inside `[lo, hi]`, by bisection on the slope.
fn branch_minimum(problem: &StagnationProblem, sign: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if problem.branch_slope(mid, sign) > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
        if b - a <= ROOT_TOL * mid.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

fn branch_roots(
    problem: &StagnationProblem,
    sign: f64,
    nodes: &[f64],
    out: &mut Vec<StagnationSolution>,
) {
    let f = |z| problem.branch(z, sign);
    let df = |z| problem.branch_slope(z, sign);
    let values: Vec<f64> = nodes.iter().map(|&z| f(z)).collect();
    let mut push = |z: f64, tangent: bool| {
        out.push(StagnationSolution {
            z_star: z,
            branch: sign as i8,
            residual: problem.residual(z),
            tangent,
        });
    };
    for i in 0..nodes.len() {
        if values[i] == 0.0 {
            let tangent = df(nodes[i]).abs() <= TANGENCY_TOL;
            push(nodes[i], tangent);
            continue;
        }
        if i + 1 < nodes.len() && values[i] * values[i + 1] < 0.0 {
            let z = hybrid_root(f, df, nodes[i], nodes[i + 1]);
            let tangent = df(z).abs() <= TANGENCY_TOL;
            push(z, tangent);
        }
        // A grazing minimum without a sign change is a tangency candidate.
        if i > 0 && i + 1 < nodes.len() {
            let (l, m, r) = (values[i - 1], values[i], values[i + 1]);
            if m.abs() <= l.abs() && m.abs() <= r.abs() && l * m > 0.0 && m * r > 0.0 {
                let z = branch_minimum(problem, sign, nodes[i - 1], nodes[i + 1]);
                let scale = (problem.ka_abs * z.exp()).max(1.0);
                if f(z).abs() <= TANGENCY_TOL * scale && df(z).abs() <= TANGENCY_TOL * scale {
                    push(z, true);
                }
            }
        }
    }
}

/// All solutions of the stagnation equation inside `[z_min, z_max]`.
pub fn solve_stagnation(
    problem: &StagnationProblem,
    z_min: f64,
    z_max: f64,
    grid: usize,
) -> Result<StagnationReport> {
    if !(z_min.is_finite() && z_max.is_finite() && z_min < z_max) {
        return Err(WaveError::domain(format!(
            "invalid search interval [{z_min}, {z_max}]"
        )));
    }
    if grid < MIN_GRID {
        return Err(WaveError::domain(format!(
            "grid must have at least {MIN_GRID} cells, got {grid}"
        )));
    }
    if !(problem.ka_abs > 0.0 && problem.ka_abs.is_finite()) {
        return Err(WaveError::domain("|kA| must be finite and positive"));
    }
    let h = (z_max - z_min) / grid as f64;
    let nodes: Vec<f64> = (0..=grid).map(|i| z_min + i as f64 * h).collect();

    let mut found = Vec::new();
    for sign in [1.0, -1.0] {
        branch_roots(problem, sign, &nodes, &mut found);
    }
    found.sort_by(|a, b| a.z_star.total_cmp(&b.z_star));
    let mut solutions: Vec<StagnationSolution> = Vec::with_capacity(found.len());
    for s in found {
        match solutions.last_mut() {
            Some(prev) if (s.z_star - prev.z_star).abs() <= DEDUP_TOL => {
                prev.tangent |= s.tangent;
            }
            _ => solutions.push(s),
        }
    }
    if solutions.is_empty() {
        return Err(WaveError::EmptyReport { z_min, z_max });
    }
    Ok(StagnationReport {
        solutions,
        search_interval: (z_min, z_max),
        grid_size: grid,
    })
}

/// Brute-force locations of the sign changes of `|kA| e^Z - |kcZ - β|` on
/// `n` equally spaced points of `[z_min, z_max]`, by linear interpolation.
///
/// Independent of [`solve_stagnation`]; used to cross-check it. Double roots
/// that touch zero without a sign change are invisible here.
pub fn dense_scan(problem: &StagnationProblem, z_min: f64, z_max: f64, n: usize) -> Vec<f64> {
    let h = (z_max - z_min) / (n - 1) as f64;
    let f = |z: f64| problem.ka_abs * z.exp() - (problem.kc * z - problem.beta).abs();
    let mut roots = Vec::new();
    let mut z_prev = z_min;
    let mut f_prev = f(z_prev);
    for i in 1..n {
        let z = z_min + i as f64 * h;
        let fz = f(z);
        if f_prev == 0.0 {
            roots.push(z_prev);
        } else if f_prev * fz < 0.0 {
            roots.push(z_prev - f_prev * (z - z_prev) / (fz - f_prev));
        }
        z_prev = z;
        f_prev = fz;
    }
    if f_prev == 0.0 {
        roots.push(z_prev);
    }
    roots
}

/// Where a stagnation depth sits relative to a sampled path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    OnTrajectory,
    InsideBand,
    OutsideBand,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedSolution {
    pub solution: StagnationSolution,
    pub placement: Placement,
}

/// Marks each `Z*` as on the path (within `1e-6` of some sample), inside
/// the path's `Z` band, or outside it. Says nothing about the dynamical
/// type of the point.
pub fn stagnation_on_trajectory(
    report: &StagnationReport,
    series: &TrajectorySeries,
) -> Vec<PlacedSolution> {
    report
        .solutions
        .iter()
        .map(|&solution| {
            let z = solution.z_star;
            let on_path = series
                .samples
                .iter()
                .any(|s| (s.scaled_z - z).abs() < ON_TRAJECTORY_TOL);
            let placement = if on_path {
                Placement::OnTrajectory
            } else if series.band.contains(z) {
                Placement::InsideBand
            } else {
                Placement::OutsideBand
            };
            PlacedSolution {
                solution,
                placement,
            }
        })
        .collect()
}

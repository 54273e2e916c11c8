//! Polar controllability sweep over target orientation change and duration.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::export::fmt_float;
use crate::model::BallParams;
use crate::rng;
use crate::shooting::{solve, SolverConfig, TargetSpec};

pub const SWEEP_CSV_HEADER: &str = "theta_f,T,bounces,error,controls";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub theta_range: (f64, f64),
    pub n_theta: usize,
    pub t_range: (f64, f64),
    pub n_t: usize,
    pub restarts: usize,
    pub epsilon: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            theta_range: (0.0, TAU),
            n_theta: 100,
            t_range: (0.1, 1.5),
            n_t: 40,
            restarts: 10,
            epsilon: 1e-2,
        }
    }
}

fn linspace(range: (f64, f64), n: usize, i: usize) -> f64 {
    if n == 1 || i == 0 {
        range.0
    } else if i == n - 1 {
        range.1
    } else {
        range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
    }
}

impl SweepGrid {
    pub fn is_valid(&self) -> bool {
        self.n_theta >= 1
            && self.n_t >= 1
            && self.theta_range.0 <= self.theta_range.1
            && self.t_range.0 <= self.t_range.1
            && self.t_range.0 > 0.0
            && self.restarts >= 1
            && self.epsilon > 0.0
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self, i: usize) -> f64 {
        linspace(self.theta_range, self.n_theta, i)
    }

    pub fn duration(&self, j: usize) -> f64 {
        linspace(self.t_range, self.n_t, j)
    }

    /// Target of cell `index` in row-major order, theta outer.
    pub fn target(&self, index: usize) -> TargetSpec {
        TargetSpec::new(self.theta(index / self.n_t), self.duration(index % self.n_t))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub theta_f: f64,
    #[serde(rename = "T")]
    pub duration: f64,
    /// Minimum bounce count found, or -1.
    pub bounces: i32,
    pub error: f64,
    pub controls: Vec<f64>,
}

impl SweepCell {
    pub fn is_solved(&self) -> bool {
        self.bounces >= 0
    }

    pub fn target(&self) -> TargetSpec {
        TargetSpec::new(self.theta_f, self.duration)
    }
}

pub fn cell_seed(master: u64, index: usize) -> u64 {
    rng::derive_seed(master, &[index as u64])
}

fn run_cell(grid: &SweepGrid, index: usize, p: &BallParams, cfg: &SolverConfig, seed: u64) -> SweepCell {
    let target = grid.target(index);
    match solve(&target, p, cfg, cell_seed(seed, index)) {
        Some(result) => SweepCell {
            theta_f: target.theta_f,
            duration: target.duration,
            bounces: result.bounce_count as i32,
            error: result.error,
            controls: result.schedule.controls(),
        },
        None => SweepCell {
            theta_f: target.theta_f,
            duration: target.duration,
            bounces: -1,
            error: f64::NAN,
            controls: Vec::new(),
        },
    }
}

/// Solves every cell on the current rayon pool. `grid.restarts` and
/// `grid.epsilon` override the corresponding `base` fields.
pub fn run_sweep(grid: &SweepGrid, p: &BallParams, base: &SolverConfig, seed: u64) -> Vec<SweepCell> {
    let cfg = SolverConfig {
        restarts: grid.restarts,
        epsilon: grid.epsilon,
        ..base.clone()
    };
    (0..grid.len())
        .into_par_iter()
        .map(|index| run_cell(grid, index, p, &cfg, seed))
        .collect()
}

/// [`run_sweep`] on a dedicated pool with `threads` workers.
pub fn run_sweep_threads(
    grid: &SweepGrid,
    p: &BallParams,
    base: &SolverConfig,
    seed: u64,
    threads: usize,
) -> Result<Vec<SweepCell>, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(|| run_sweep(grid, p, base, seed)))
}

pub fn format_controls(controls: &[f64]) -> String {
    controls
        .chunks(2)
        .map(|uv| format!("{}:{}", fmt_float(uv[0]), fmt_float(uv[1])))
        .collect::<Vec<_>>()
        .join(";")
}

/// Inverse of [`format_controls`].
pub fn parse_controls(text: &str) -> Option<Vec<f64>> {
    if text.is_empty() {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    for pair in text.split(';') {
        let (u, v) = pair.split_once(':')?;
        out.push(u.parse().ok()?);
        out.push(v.parse().ok()?);
    }
    Some(out)
}

pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut csv = String::from(SWEEP_CSV_HEADER);
    csv.push('\n');
    for c in cells {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_float(c.theta_f),
            fmt_float(c.duration),
            c.bounces,
            fmt_float(c.error),
            format_controls(&c.controls)
        ));
    }
    csv
}

/// Reads back [`sweep_csv`] output.
pub fn parse_sweep_csv(text: &str) -> Option<Vec<SweepCell>> {
    let mut lines = text.lines();
    if lines.next()? != SWEEP_CSV_HEADER {
        return None;
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.splitn(5, ',').collect();
            if f.len() != 5 {
                return None;
            }
            Some(SweepCell {
                theta_f: f[0].parse().ok()?,
                duration: f[1].parse().ok()?,
                bounces: f[2].parse().ok()?,
                error: f[3].parse().ok()?,
                controls: parse_controls(f[4])?,
            })
        })
        .collect()
}

//! Limit-cycle study of the disk bouncing on a fixed parabola.
//!
//! The post-impact states form a discrete return map. Its attractor may be
//! periodic with a small period `q` (a disk dropped off the vertex settles
//! into a two-impact swing), so distances are measured between states `q`
//! impacts apart:
//!
//! ```text
//! d_k = |dx| + |dxdot| + |dydot| + R |dthetadot|   between section states k and k + q
//! ```
//!
//! Stability is graded twice: from the median of successive ratios
//! `d_{k+q} / d_k`, and from the spectral radius of a central-difference
//! Jacobian of the `q`-step map. Stationary impacts conserve energy, so the
//! full map always has a unit multiplier along the family of orbits at
//! other energies. The Jacobian is therefore taken on the energy level, in
//! the coordinates `(x, xdot, thetadot)`, with `ydot` recovered from the
//! energy.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::executor::{run_surface_with, ExecConfig, Termination};
use crate::export::fmt_float;
use crate::flight::{propagate, time_to_impact};
use crate::impact::{surface_reset, ImpactLaw};
use crate::model::{energy, guard_value, BallParams, BallState, Surface};

pub const MAX_PERIOD: usize = 4;
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;
/// Distances below this carry no ratio information.
pub const RATIO_NOISE_FLOOR: f64 = 1e-10;
pub const RATIO_WINDOW: usize = 10;
pub const JACOBIAN_STEP: f64 = 1e-6;
pub const CYCLE_CSV_HEADER: &str = "impact,t,x,y,theta,vx,vy,omega,distance";

#[derive(Debug, Error, PartialEq)]
pub enum CycleError {
    #[error("the drop state must start strictly above the parabola")]
    StartNotAbove,
    #[error("at least 20 impacts are needed, got {0}")]
    TooFewImpacts(usize),
    #[error("run ended after {impacts} impacts ({termination:?})")]
    RunEnded {
        impacts: usize,
        termination: Termination,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub converged: bool,
    /// Detected period of the section attractor, in impacts.
    pub period: usize,
    /// Last `period` section states.
    pub period_states: Vec<BallState>,
    /// All post-impact states, in order.
    pub section: Vec<BallState>,
    /// `d_k` for `k = 0 .. section.len() - period`.
    pub distances: Vec<f64>,
    /// `d_{k+period} / d_k` wherever `d_k` is above the noise floor.
    pub contraction_ratios: Vec<f64>,
    /// Median of the last ten ratios, if there are any.
    pub ratio_estimate: Option<f64>,
    /// `(d_last / d_first)^(1 / returns)` over the whole run.
    pub mean_ratio: Option<f64>,
    /// Spectral radius of the `period`-step map on the energy level.
    pub jacobian_radius: f64,
    /// Ratio estimate when available, otherwise the Jacobian one.
    pub spectral_radius_estimate: f64,
    /// First impact count at which `d_k` fell below the tolerance.
    pub converged_at: Option<usize>,
}

impl CycleReport {
    /// Agreement of the two stability estimates.
    pub fn estimate_gap(&self) -> Option<f64> {
        self.ratio_estimate.map(|r| (r - self.jacobian_radius).abs())
    }

    pub fn to_csv(&self) -> String {
        let mut csv = String::from(CYCLE_CSV_HEADER);
        csv.push('\n');
        for (k, s) in self.section.iter().enumerate() {
            let d = self.distances.get(k).copied().map(fmt_float).unwrap_or_default();
            let fields = [s.t, s.x, s.y, s.theta, s.vx, s.vy, s.omega].map(fmt_float);
            csv.push_str(&format!("{},{},{}\n", k + 1, fields.join(","), d));
        }
        csv
    }
}

pub fn section_distance(a: &BallState, b: &BallState, p: &BallParams) -> f64 {
    (a.x - b.x).abs() + (a.vx - b.vx).abs() + (a.vy - b.vy).abs() + p.radius * (a.omega - b.omega).abs()
}

fn period_distances(section: &[BallState], q: usize, p: &BallParams) -> Vec<f64> {
    section
        .windows(q + 1)
        .map(|w| section_distance(&w[0], &w[q], p))
        .collect()
}

fn tail_mean(d: &[f64]) -> f64 {
    let tail = &d[d.len().saturating_sub(RATIO_WINDOW)..];
    tail.iter().sum::<f64>() / tail.len().max(1) as f64
}

/// Smallest period whose recent return distances are within a factor ten
/// of the best period's.
pub fn detect_period(section: &[BallState], p: &BallParams) -> usize {
    let tails: Vec<f64> = (1..=MAX_PERIOD)
        .filter(|q| section.len() > *q)
        .map(|q| tail_mean(&period_distances(section, q, p)))
        .collect();
    let best = tails.iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = (10.0 * best).max(CONVERGENCE_TOLERANCE);
    tails
        .iter()
        .position(|t| *t <= cutoff)
        .map_or(1, |i| i + 1)
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Post-impact state after `q` more impacts. `s` may sit on the surface
/// as long as it is leaving it.
fn return_map(s: &BallState, surf: &Surface, p: &BallParams, q: usize, exec: &ExecConfig) -> Option<BallState> {
    let mut s = *s;
    for _ in 0..q {
        let dt = time_to_impact(&s, surf, p, exec.t_min)?;
        s = surface_reset(&propagate(&s, dt, p), surf, p, exec.law).ok()?.post;
    }
    Some(s)
}

/// Section state on energy level `e` with reduced coordinates
/// `(x, xdot, thetadot)`; `ydot` takes the sign of `reference.vy`.
fn lift(r: [f64; 3], e: f64, alpha: f64, reference: &BallState, p: &BallParams) -> Option<BallState> {
    let [x, vx, omega] = r;
    let y = alpha * x * x + p.radius;
    let ke = e - p.mass * p.gravity * y - 0.5 * p.mass * vx * vx - 0.5 * p.inertia * omega * omega;
    if ke < 0.0 {
        return None;
    }
    let vy = (2.0 * ke / p.mass).sqrt().copysign(reference.vy);
    Some(BallState {
        x,
        y,
        theta: 0.0,
        vx,
        vy,
        omega,
        t: 0.0,
    })
}

/// Spectral radius of the energy-restricted `q`-step return map at `s`.
pub fn return_map_radius(
    s: &BallState,
    alpha: f64,
    p: &BallParams,
    q: usize,
    exec: &ExecConfig,
) -> Option<f64> {
    let surf = Surface::Parabola(alpha);
    let e = energy(s, p).total;
    let base = [s.x, s.vx, s.omega];
    let reduced = |r: [f64; 3]| -> Option<[f64; 3]> {
        let start = lift(r, e, alpha, s, p)?;
        let end = return_map(&start, &surf, p, q, exec)?;
        Some([end.x, end.vx, end.omega])
    };
    let mut jac = Matrix3::zeros();
    for i in 0..3 {
        let mut plus = base;
        let mut minus = base;
        plus[i] += JACOBIAN_STEP;
        minus[i] -= JACOBIAN_STEP;
        let (fp, fm) = (reduced(plus)?, reduced(minus)?);
        for row in 0..3 {
            jac[(row, i)] = (fp[row] - fm[row]) / (2.0 * JACOBIAN_STEP);
        }
    }
    Some(
        jac.complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
    )
}

/// Rolling-law study; see [`limit_cycle_study_with`].
pub fn limit_cycle_study(
    alpha: f64,
    s0: &BallState,
    p: &BallParams,
    n_impacts: usize,
) -> Result<CycleReport, CycleError> {
    limit_cycle_study_with(alpha, s0, p, n_impacts, ImpactLaw::Rolling)
}

pub fn limit_cycle_study_with(
    alpha: f64,
    s0: &BallState,
    p: &BallParams,
    n_impacts: usize,
    law: ImpactLaw,
) -> Result<CycleReport, CycleError> {
    let surf = Surface::Parabola(alpha);
    let h0 = guard_value(s0, &surf, p);
    if h0.is_nan() || h0 >= 0.0 {
        return Err(CycleError::StartNotAbove);
    }
    if n_impacts < 20 {
        return Err(CycleError::TooFewImpacts(n_impacts));
    }
    let exec = ExecConfig {
        law,
        ..ExecConfig::default()
    };
    let traj = run_surface_with(s0, &surf, p, f64::INFINITY, n_impacts, &exec);
    if traj.events.len() < n_impacts {
        return Err(CycleError::RunEnded {
            impacts: traj.events.len(),
            termination: traj.termination,
        });
    }
    let section = traj.section();
    let period = detect_period(&section, p);
    let distances = period_distances(&section, period, p);

    let converged_at = distances
        .iter()
        .position(|d| *d < CONVERGENCE_TOLERANCE)
        .map(|k| k + period + 1);
    let contraction_ratios: Vec<f64> = distances
        .iter()
        .zip(&distances[period.min(distances.len())..])
        .filter(|(d0, _)| **d0 > RATIO_NOISE_FLOOR)
        .map(|(d0, d1)| d1 / d0)
        .collect();
    let tail = contraction_ratios[contraction_ratios.len().saturating_sub(RATIO_WINDOW)..].to_vec();
    let ratio_estimate = median(tail);

    let above: Vec<(usize, f64)> = distances
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, d)| *d > RATIO_NOISE_FLOOR)
        .collect();
    let mean_ratio = match (above.first(), above.last()) {
        (Some(&(k0, d0)), Some(&(k1, d1))) if k1 > k0 => {
            Some((d1 / d0).powf(period as f64 / (k1 - k0) as f64))
        }
        _ => None,
    };

    let last = *section.last().expect("n_impacts >= 20");
    let jacobian_radius = return_map_radius(&last, alpha, p, period, &exec).unwrap_or(f64::NAN);
    let spectral_radius_estimate = ratio_estimate.unwrap_or(jacobian_radius);

    Ok(CycleReport {
        converged: converged_at.is_some(),
        period,
        period_states: section[section.len() - period..].to_vec(),
        section,
        distances,
        contraction_ratios,
        ratio_estimate,
        mean_ratio,
        jacobian_radius,
        spectral_radius_estimate,
        converged_at,
    })
}

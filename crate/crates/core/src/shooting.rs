//! Multi-start shooting for the bouncing-disk orientation problem.
//!
//! The disk starts at rest at `(x0, y0, theta0)` and must come back to
//! `(x0, y0)` with orientation `theta_f` at time `T`. The only controls are
//! the table placements `(u_k, v_k)` for each bounce. For every bounce count
//! `n = 0, 1, ...` the solver draws random placements, polishes each with a
//! box-constrained simplex search on
//!
//! ```text
//! E = <q, A q>,  q = [(x_f - x0)^2, (y_f - y0)^2, (theta_f' - theta_f)^2, (T_f - T)^2]
//! ```
//!
//! and stops at the first `n` for which some restart gets `E <= epsilon`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::executor::{
    run_schedule_with, ControlSchedule, ExecConfig, HybridTrajectory, TerminalMode,
    DEFAULT_MAX_BOUNCES,
};
use crate::model::{BallParams, BallState};
use crate::rng;
use crate::simplex::{self, SimplexOptions};

/// Error assigned to runs that end infeasibly or in the Zeno guard.
pub const PENALTY: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub x0: f64,
    pub y0: f64,
    pub theta0: f64,
    pub theta_f: f64,
    /// Target final time `T`.
    pub duration: f64,
}

impl TargetSpec {
    /// Target from the standard start `(0, 1, 0)`.
    pub fn new(theta_f: f64, duration: f64) -> Self {
        Self {
            x0: 0.0,
            y0: 1.0,
            theta0: 0.0,
            theta_f,
            duration,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.duration > 0.0
            && [self.x0, self.y0, self.theta0, self.theta_f, self.duration]
                .iter()
                .all(|v| v.is_finite())
    }

    pub fn start_state(&self) -> BallState {
        BallState::at_rest(self.x0, self.y0, self.theta0)
    }
}

impl Default for TargetSpec {
    fn default() -> Self {
        Self::new(0.0, 1.0)
    }
}

/// Diagonal of the weight matrix `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorWeights(pub [f64; 4]);

impl Default for ErrorWeights {
    fn default() -> Self {
        Self([1.0, 1.0, 50.0, 5.0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalKind {
    #[default]
    Apex,
    FixedTime,
}

impl TerminalKind {
    pub fn mode_for(self, target: &TargetSpec) -> TerminalMode {
        match self {
            Self::Apex => TerminalMode::Apex,
            Self::FixedTime => TerminalMode::FixedTime(target.duration),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub restarts: usize,
    pub epsilon: f64,
    pub max_iters: usize,
    pub simplex_tol: f64,
    pub terminal: TerminalKind,
    pub height_range: (f64, f64),
    pub angle_range: (f64, f64),
    pub max_bounces: usize,
    /// Draws allowed per restart when looking for a feasible start.
    pub start_draws: usize,
    pub weights: ErrorWeights,
    pub exec: ExecConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            epsilon: 1e-2,
            max_iters: 200,
            simplex_tol: 1e-6,
            terminal: TerminalKind::Apex,
            height_range: (0.0, 1.0),
            angle_range: (0.0, PI),
            max_bounces: DEFAULT_MAX_BOUNCES,
            start_draws: 1000,
            weights: ErrorWeights::default(),
            exec: ExecConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn is_valid(&self) -> bool {
        self.restarts >= 1
            && self.epsilon > 0.0
            && self.height_range.0 <= self.height_range.1
            && self.angle_range.0 <= self.angle_range.1
            && self.weights.0.iter().all(|w| *w >= 0.0)
    }

    fn bounds(&self, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (a0, a1) = self.angle_range;
        let (h0, h1) = self.height_range;
        let lower = [a0, h0].repeat(n);
        let upper = [a1, h1].repeat(n);
        let scale = [0.1 * (a1 - a0), 0.1 * (h1 - h0)].repeat(n);
        (lower, upper, scale)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingResult {
    pub schedule: ControlSchedule,
    pub bounce_count: usize,
    pub error: f64,
    pub terminal: BallState,
    pub terminal_time: f64,
    /// Seed passed to [`solve`].
    pub seed: u64,
    /// Restart that produced the schedule.
    pub restart: usize,
}

/// One refined restart.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub bounces: usize,
    pub restart: usize,
    pub controls: Vec<f64>,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Every restart that was refined, in `(bounces, restart)` order.
    pub candidates: Vec<Candidate>,
    pub result: Option<ShootingResult>,
}

impl SolveReport {
    /// Lowest-error candidate regardless of bounce count.
    pub fn best_candidate(&self) -> Option<&Candidate> {
        self.candidates
            .iter()
            .min_by(|a, b| a.error.total_cmp(&b.error))
    }
}

/// `E = sum_i A_ii q_i^2`; abnormal runs get [`PENALTY`].
pub fn error_function(traj: &HybridTrajectory, target: &TargetSpec, w: &ErrorWeights) -> f64 {
    if !traj.termination.is_normal() {
        return PENALTY;
    }
    let end = &traj.terminal;
    let q = [
        (end.x - target.x0).powi(2),
        (end.y - target.y0).powi(2),
        (end.theta - target.theta_f).powi(2),
        (traj.terminal_time - target.duration).powi(2),
    ];
    let e: f64 = q.iter().zip(w.0).map(|(qi, a)| a * qi * qi).sum();
    if e.is_nan() {
        PENALTY
    } else {
        e
    }
}

/// Simulates a flat `[u_1, v_1, ...]` control vector from the target's
/// start state.
pub fn simulate_controls(
    controls: &[f64],
    target: &TargetSpec,
    p: &BallParams,
    cfg: &SolverConfig,
) -> HybridTrajectory {
    let sched = ControlSchedule::from_controls(controls).expect("controls come in pairs");
    run_schedule_with(
        &target.start_state(),
        &sched,
        p,
        cfg.terminal.mode_for(target),
        &cfg.exec,
    )
}

pub fn control_error(
    controls: &[f64],
    target: &TargetSpec,
    p: &BallParams,
    cfg: &SolverConfig,
) -> f64 {
    error_function(&simulate_controls(controls, target, p, cfg), target, &cfg.weights)
}

/// Simplex refinement of one initial control vector of length `2 n`.
pub fn refine(
    initial: &[f64],
    n: usize,
    target: &TargetSpec,
    p: &BallParams,
    cfg: &SolverConfig,
) -> (Vec<f64>, f64) {
    assert_eq!(initial.len(), 2 * n, "control vector must hold n (u, v) pairs");
    let (lower, upper, scale) = cfg.bounds(n);
    let result = simplex::minimize(
        |x| control_error(x, target, p, cfg),
        initial,
        &scale,
        &lower,
        &upper,
        &SimplexOptions {
            max_iters: cfg.max_iters,
            tolerance: cfg.simplex_tol,
        },
    );
    (result.x, result.value)
}

fn draw_controls(n: usize, cfg: &SolverConfig, rng: &mut impl Rng) -> Vec<f64> {
    let (a0, a1) = cfg.angle_range;
    let (h0, h1) = cfg.height_range;
    let mut controls = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let v = h0 + (h1 - h0) * rng.random::<f64>();
        let u = a0 + (a1 - a0) * rng.random::<f64>();
        controls.push(u);
        controls.push(v);
    }
    controls
}

/// Uniform draw from the control box, repeated up to `cfg.start_draws`
/// times until the schedule runs to a normal termination. The last draw
/// is used if none does.
fn initial_guess(
    n: usize,
    restart: usize,
    target: &TargetSpec,
    p: &BallParams,
    cfg: &SolverConfig,
    seed: u64,
) -> Vec<f64> {
    let mut rng = rng::stream(seed, &[n as u64, restart as u64]);
    let mut controls = draw_controls(n, cfg, &mut rng);
    for _ in 1..cfg.start_draws.max(1) {
        if simulate_controls(&controls, target, p, cfg).termination.is_normal() {
            break;
        }
        controls = draw_controls(n, cfg, &mut rng);
    }
    controls
}

/// Runs the restarts bounce count by bounce count and keeps every refined
/// candidate. Stops after the first bounce count with an accepted
/// candidate, since larger counts can never be selected.
pub fn solve_report(
    target: &TargetSpec,
    p: &BallParams,
    cfg: &SolverConfig,
    seed: u64,
) -> SolveReport {
    let mut candidates = Vec::new();
    for n in 0..=cfg.max_bounces {
        // without controls every restart is the same run
        let restarts = if n == 0 { 1 } else { cfg.restarts };
        let first = candidates.len();
        for restart in 0..restarts {
            let initial = initial_guess(n, restart, target, p, cfg, seed);
            let (controls, error) = refine(&initial, n, target, p, cfg);
            candidates.push(Candidate {
                bounces: n,
                restart,
                controls,
                error,
            });
        }
        let accepted = candidates[first..]
            .iter()
            .filter(|c| c.error <= cfg.epsilon)
            .min_by(|a, b| a.error.total_cmp(&b.error).then(a.restart.cmp(&b.restart)));
        if let Some(best) = accepted {
            let traj = simulate_controls(&best.controls, target, p, cfg);
            let result = ShootingResult {
                schedule: ControlSchedule::from_controls(&best.controls)
                    .expect("controls come in pairs"),
                bounce_count: n,
                error: error_function(&traj, target, &cfg.weights),
                terminal: traj.terminal,
                terminal_time: traj.terminal_time,
                seed,
                restart: best.restart,
            };
            return SolveReport {
                candidates,
                result: Some(result),
            };
        }
    }
    SolveReport {
        candidates,
        result: None,
    }
}

/// Minimum-bounce schedule reaching `E <= epsilon`, if any restart found
/// one.
pub fn solve(
    target: &TargetSpec,
    p: &BallParams,
    cfg: &SolverConfig,
    seed: u64,
) -> Option<ShootingResult> {
    solve_report(target, p, cfg, seed).result
}

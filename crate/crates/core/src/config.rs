//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, keys are namespaced
//! (`ball.m`, `solver.restarts`, `sweep.n_theta`, ...). Unknown keys,
//! repeated keys and unparsable values are errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::error::ModelError;
use crate::executor::ControlSchedule;
use crate::experiments::sweep::{parse_controls, SweepGrid};
use crate::impact::ImpactLaw;
use crate::model::{BallParams, BallState, Surface, TableConfig};
use crate::shooting::{SolverConfig, TargetSpec, TerminalKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` is set twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceKind {
    Plane,
    Parabola,
}

/// Settings of the `simulate` and `audit` commands.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub start: BallState,
    pub surface: SurfaceKind,
    pub u: f64,
    pub v: f64,
    pub alpha: f64,
    pub t_end: f64,
    pub max_bounces: usize,
    pub samples_per_arc: usize,
    /// When set, the run follows this schedule instead of a fixed surface.
    pub schedule: Option<Vec<f64>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            start: BallState::at_rest(0.0, 1.0, 0.0),
            surface: SurfaceKind::Plane,
            u: 0.0,
            v: 0.0,
            alpha: 0.5,
            t_end: 3.0,
            max_bounces: 20,
            samples_per_arc: 20,
            schedule: None,
        }
    }
}

impl SimConfig {
    pub fn surface(&self) -> Surface {
        match self.surface {
            SurfaceKind::Plane => Surface::Plane(TableConfig::stationary(self.u, self.v)),
            SurfaceKind::Parabola => Surface::Parabola(self.alpha),
        }
    }
}

/// Radius of the default sweep disk. Reachable orientation changes
/// grow roughly as 1/R, so the sweep is sensitive to this choice.
pub const SWEEP_RADIUS: f64 = 0.05;

/// Radius of the default limit-cycle disk. Contraction toward the
/// swing speeds up with R.
pub const CYCLE_RADIUS: f64 = 0.2;

fn unit_disk(radius: f64) -> BallParams {
    BallParams {
        mass: 1.0,
        inertia: 0.5 * radius * radius,
        radius,
        gravity: 9.81,
    }
}

/// Uniform disk of unit mass and radius [`SWEEP_RADIUS`].
pub fn sweep_ball() -> BallParams {
    unit_disk(SWEEP_RADIUS)
}

/// Uniform disk of unit mass and radius [`CYCLE_RADIUS`].
pub fn cycle_ball() -> BallParams {
    unit_disk(CYCLE_RADIUS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleConfig {
    /// Disk used in the bowl, independent of `ball`.
    pub ball: BallParams,
    pub alpha: f64,
    pub start: BallState,
    pub n_impacts: usize,
    pub law: ImpactLaw,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            ball: cycle_ball(),
            alpha: 0.5,
            start: BallState::at_rest(0.3, 1.0, 0.0),
            n_impacts: 200,
            law: ImpactLaw::Rolling,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub ball: BallParams,
    pub solver: SolverConfig,
    pub target: TargetSpec,
    pub grid: SweepGrid,
    pub sim: SimConfig,
    pub cycle: CycleConfig,
    pub seed: u64,
}


impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            ball: sweep_ball(),
            solver: SolverConfig::default(),
            target: TargetSpec::default(),
            grid: SweepGrid::default(),
            sim: SimConfig::default(),
            cycle: CycleConfig::default(),
            seed: 42,
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn parse_value<T: FromStr>(key: &str, e: &Entry) -> Result<T, ConfigError> {
    e.value.parse().map_err(|_| ConfigError::BadValue {
        line: e.line,
        key: key.to_string(),
        value: e.value.clone(),
    })
}

fn parse_law(key: &str, e: &Entry) -> Result<ImpactLaw, ConfigError> {
    match e.value.as_str() {
        "rolling" => Ok(ImpactLaw::Rolling),
        "slippery" => Ok(ImpactLaw::Slippery),
        _ => Err(bad(key, e)),
    }
}

fn bad(key: &str, e: &Entry) -> ConfigError {
    ConfigError::BadValue {
        line: e.line,
        key: key.to_string(),
        value: e.value.clone(),
    }
}

pub fn parse_terminal(text: &str) -> Option<TerminalKind> {
    match text {
        "apex" => Some(TerminalKind::Apex),
        "fixed-time" => Some(TerminalKind::FixedTime),
        _ => None,
    }
}

const KEYS: &[&str] = &[
    "seed",
    "ball.m",
    "ball.I",
    "ball.R",
    "ball.g",
    "solver.restarts",
    "solver.epsilon",
    "solver.max_iters",
    "solver.simplex_tol",
    "solver.terminal_mode",
    "solver.height_min",
    "solver.height_max",
    "solver.angle_min",
    "solver.angle_max",
    "solver.max_bounces",
    "solver.w_x",
    "solver.w_y",
    "solver.w_theta",
    "solver.w_T",
    "exec.t_min",
    "exec.zeno_interval",
    "exec.zeno_strikes",
    "exec.law",
    "target.theta_f",
    "target.T",
    "target.x0",
    "target.y0",
    "target.theta0",
    "sweep.n_theta",
    "sweep.n_T",
    "sweep.theta_min",
    "sweep.theta_max",
    "sweep.T_min",
    "sweep.T_max",
    "sim.x",
    "sim.y",
    "sim.theta",
    "sim.vx",
    "sim.vy",
    "sim.omega",
    "sim.surface",
    "sim.u",
    "sim.v",
    "sim.alpha",
    "sim.t_end",
    "sim.max_bounces",
    "sim.samples_per_arc",
    "sim.schedule",
    "cycle.m",
    "cycle.I",
    "cycle.R",
    "cycle.g",
    "cycle.alpha",
    "cycle.x0",
    "cycle.y0",
    "cycle.n_impacts",
    "cycle.law",
];

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse()
    }

    fn apply(&mut self, entries: &BTreeMap<String, Entry>) -> Result<(), ConfigError> {
        let b = &self.ball;
        let mut ball = (b.mass, b.inertia, b.radius, b.gravity);
        let c = &self.cycle.ball;
        let mut cball = (c.mass, c.inertia, c.radius, c.gravity);
        for (key, e) in entries {
            let k = key.as_str();
            match k {
                "seed" => self.seed = parse_value(k, e)?,
                "ball.m" => ball.0 = parse_value(k, e)?,
                "ball.I" => ball.1 = parse_value(k, e)?,
                "ball.R" => ball.2 = parse_value(k, e)?,
                "ball.g" => ball.3 = parse_value(k, e)?,
                "solver.restarts" => self.solver.restarts = parse_value(k, e)?,
                "solver.epsilon" => self.solver.epsilon = parse_value(k, e)?,
                "solver.max_iters" => self.solver.max_iters = parse_value(k, e)?,
                "solver.simplex_tol" => self.solver.simplex_tol = parse_value(k, e)?,
                "solver.terminal_mode" => {
                    self.solver.terminal = parse_terminal(&e.value).ok_or_else(|| bad(k, e))?
                }
                "solver.height_min" => self.solver.height_range.0 = parse_value(k, e)?,
                "solver.height_max" => self.solver.height_range.1 = parse_value(k, e)?,
                "solver.angle_min" => self.solver.angle_range.0 = parse_value(k, e)?,
                "solver.angle_max" => self.solver.angle_range.1 = parse_value(k, e)?,
                "solver.max_bounces" => self.solver.max_bounces = parse_value(k, e)?,
                "solver.w_x" => self.solver.weights.0[0] = parse_value(k, e)?,
                "solver.w_y" => self.solver.weights.0[1] = parse_value(k, e)?,
                "solver.w_theta" => self.solver.weights.0[2] = parse_value(k, e)?,
                "solver.w_T" => self.solver.weights.0[3] = parse_value(k, e)?,
                "exec.t_min" => self.solver.exec.t_min = parse_value(k, e)?,
                "exec.zeno_interval" => self.solver.exec.zeno_interval = parse_value(k, e)?,
                "exec.zeno_strikes" => self.solver.exec.zeno_strikes = parse_value(k, e)?,
                "exec.law" => self.solver.exec.law = parse_law(k, e)?,
                "target.theta_f" => self.target.theta_f = parse_value(k, e)?,
                "target.T" => self.target.duration = parse_value(k, e)?,
                "target.x0" => self.target.x0 = parse_value(k, e)?,
                "target.y0" => self.target.y0 = parse_value(k, e)?,
                "target.theta0" => self.target.theta0 = parse_value(k, e)?,
                "sweep.n_theta" => self.grid.n_theta = parse_value(k, e)?,
                "sweep.n_T" => self.grid.n_t = parse_value(k, e)?,
                "sweep.theta_min" => self.grid.theta_range.0 = parse_value(k, e)?,
                "sweep.theta_max" => self.grid.theta_range.1 = parse_value(k, e)?,
                "sweep.T_min" => self.grid.t_range.0 = parse_value(k, e)?,
                "sweep.T_max" => self.grid.t_range.1 = parse_value(k, e)?,
                "sim.x" => self.sim.start.x = parse_value(k, e)?,
                "sim.y" => self.sim.start.y = parse_value(k, e)?,
                "sim.theta" => self.sim.start.theta = parse_value(k, e)?,
                "sim.vx" => self.sim.start.vx = parse_value(k, e)?,
                "sim.vy" => self.sim.start.vy = parse_value(k, e)?,
                "sim.omega" => self.sim.start.omega = parse_value(k, e)?,
                "sim.surface" => {
                    self.sim.surface = match e.value.as_str() {
                        "plane" => SurfaceKind::Plane,
                        "parabola" => SurfaceKind::Parabola,
                        _ => return Err(bad(k, e)),
                    }
                }
                "sim.u" => self.sim.u = parse_value(k, e)?,
                "sim.v" => self.sim.v = parse_value(k, e)?,
                "sim.alpha" => self.sim.alpha = parse_value(k, e)?,
                "sim.t_end" => self.sim.t_end = parse_value(k, e)?,
                "sim.max_bounces" => self.sim.max_bounces = parse_value(k, e)?,
                "sim.samples_per_arc" => self.sim.samples_per_arc = parse_value(k, e)?,
                "sim.schedule" => {
                    let controls = parse_controls(&e.value).ok_or_else(|| bad(k, e))?;
                    self.sim.schedule = Some(controls);
                }
                "cycle.m" => cball.0 = parse_value(k, e)?,
                "cycle.I" => cball.1 = parse_value(k, e)?,
                "cycle.R" => cball.2 = parse_value(k, e)?,
                "cycle.g" => cball.3 = parse_value(k, e)?,
                "cycle.alpha" => self.cycle.alpha = parse_value(k, e)?,
                "cycle.x0" => self.cycle.start.x = parse_value(k, e)?,
                "cycle.y0" => self.cycle.start.y = parse_value(k, e)?,
                "cycle.n_impacts" => self.cycle.n_impacts = parse_value(k, e)?,
                "cycle.law" => self.cycle.law = parse_law(k, e)?,
                _ => unreachable!("keys are checked while parsing"),
            }
        }
        self.ball = BallParams::new(ball.0, ball.1, ball.2, ball.3)?;
        self.cycle.ball = BallParams::new(cball.0, cball.1, cball.2, cball.3)?;
        self.grid.restarts = self.solver.restarts;
        self.grid.epsilon = self.solver.epsilon;
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.ball.validate()?;
        self.cycle.ball.validate()?;
        if !self.solver.is_valid() {
            return Err(ConfigError::Invalid("solver needs restarts >= 1, epsilon > 0 and ordered ranges".into()));
        }
        if !self.target.is_valid() {
            return Err(ConfigError::Invalid("target.T must be positive".into()));
        }
        if !self.grid.is_valid() {
            return Err(ConfigError::Invalid("sweep ranges must be ordered with positive T and resolutions >= 1".into()));
        }
        if let Some(s) = &self.sim.schedule {
            ControlSchedule::from_controls(s).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Surface::parabola(self.cycle.alpha)?;
        if self.sim.surface == SurfaceKind::Parabola {
            Surface::parabola(self.sim.alpha)?;
        }
        Ok(())
    }
}

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.to_string(),
                });
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            let entry = Entry {
                line,
                value: value.to_string(),
            };
            if entries.insert(key.to_string(), entry).is_some() {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
        }
        let mut cfg = Self::default();
        cfg.apply(&entries)?;
        Ok(cfg)
    }
}

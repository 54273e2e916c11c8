//! Hybrid execution: closed-form flight interleaved with resets.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::export::fmt_float;
use crate::flight::{time_to_impact, FlightArc};
use crate::impact::{surface_reset, table_reset, ImpactLaw, ImpactOutcome, GUARD_TOLERANCE};
use crate::model::{guard_rate, guard_value, BallParams, BallState, Surface, TableConfig};

/// Bounce budget used by the controllability experiments.
pub const DEFAULT_MAX_BOUNCES: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("schedule has {entries} entries but {max_bounces} bounces were requested")]
    TooFewEntries { entries: usize, max_bounces: usize },
    #[error("{max_bounces} bounces exceeds the cap of {cap}")]
    OverCap { max_bounces: usize, cap: usize },
    #[error("control vector has odd length {0}")]
    OddControls(usize),
}

/// Table placements, one per bounce. The k-th impact happens against
/// `entries[k]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub entries: Vec<TableConfig>,
    pub max_bounces: usize,
}

impl ControlSchedule {
    pub fn new(entries: Vec<TableConfig>, max_bounces: usize) -> Result<Self, ScheduleError> {
        if entries.len() < max_bounces {
            return Err(ScheduleError::TooFewEntries {
                entries: entries.len(),
                max_bounces,
            });
        }
        Ok(Self {
            entries,
            max_bounces,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn constant(table: TableConfig, bounces: usize) -> Self {
        Self {
            entries: vec![table; bounces],
            max_bounces: bounces,
        }
    }

    /// Stationary placements from a flat `[u_1, v_1, u_2, v_2, ...]` vector.
    pub fn from_controls(controls: &[f64]) -> Result<Self, ScheduleError> {
        if !controls.len().is_multiple_of(2) {
            return Err(ScheduleError::OddControls(controls.len()));
        }
        let entries: Vec<_> = controls
            .chunks_exact(2)
            .map(|pair| TableConfig::stationary(pair[0], pair[1]))
            .collect();
        let n = entries.len();
        Ok(Self {
            entries,
            max_bounces: n,
        })
    }

    /// Inverse of [`ControlSchedule::from_controls`] over the used entries.
    pub fn controls(&self) -> Vec<f64> {
        self.entries[..self.max_bounces]
            .iter()
            .flat_map(|t| [t.u, t.v])
            .collect()
    }

    pub fn check_cap(&self, cap: usize) -> Result<(), ScheduleError> {
        if self.max_bounces > cap {
            return Err(ScheduleError::OverCap {
                max_bounces: self.max_bounces,
                cap,
            });
        }
        Ok(())
    }
}

/// When a schedule run stops once its bounce budget is spent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum TerminalMode {
    /// At the first apex (`ydot = 0`) after the last bounce.
    #[default]
    Apex,
    /// At the given absolute time.
    FixedTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ApexReached,
    TimeReached,
    NoMoreImpacts,
    /// Too many impacts: past the schedule in fixed-time mode, or impacts
    /// crowding together on a fixed surface.
    ZenoGuard,
    /// The disk started below a placement or a reset had no admissible
    /// solution.
    InfeasiblePlacement,
    /// A fixed-surface run used up its impact budget.
    BounceLimit,
}

impl Termination {
    /// Normal terminations are scored by the error functional; the others
    /// receive the penalty.
    pub fn is_normal(self) -> bool {
        !matches!(self, Self::ZenoGuard | Self::InfeasiblePlacement)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactEvent {
    pub pre: BallState,
    pub outcome: ImpactOutcome,
    pub surface: Surface,
}

/// Knobs of the executor that are not part of the physics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecConfig {
    /// Roots of the guard at or before this flight time are ignored, so an
    /// impact is not detected again right after its reset.
    pub t_min: f64,
    /// Inter-impact times below this count as Zeno strikes.
    pub zeno_interval: f64,
    /// Consecutive strikes that end a fixed-surface run.
    pub zeno_strikes: usize,
    pub law: ImpactLaw,
}

impl Default for ExecConfig {
    fn default() -> Self {
        Self {
            t_min: 1e-9,
            zeno_interval: 1e-6,
            zeno_strikes: 3,
            law: ImpactLaw::Rolling,
        }
    }
}

/// Phase label of a trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Flight(usize),
    Impact(usize),
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Flight(k) => write!(f, "flight_{k}"),
            Phase::Impact(k) => write!(f, "impact_{k}"),
        }
    }
}

/// Full record of a hybrid run. `events[k].pre == arcs[k].end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridTrajectory {
    pub arcs: Vec<FlightArc>,
    pub events: Vec<ImpactEvent>,
    pub terminal: BallState,
    pub terminal_time: f64,
    pub bounce_count: usize,
    pub termination: Termination,
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,x,y,theta,vx,vy,omega,phase";

impl HybridTrajectory {
    /// Each arc sampled at `samples_per_arc + 1` evenly spaced instants,
    /// followed by the post-impact state of the event that ends it.
    pub fn samples(&self, p: &BallParams, samples_per_arc: usize) -> Vec<(BallState, Phase)> {
        let n = samples_per_arc.max(1);
        let mut out = Vec::with_capacity(self.arcs.len() * (n + 2));
        for (k, arc) in self.arcs.iter().enumerate() {
            if arc.duration == 0.0 {
                out.push((arc.start, Phase::Flight(k)));
            } else {
                for j in 0..n {
                    let tau = arc.duration * j as f64 / n as f64;
                    out.push((arc.sample(tau, p), Phase::Flight(k)));
                }
                out.push((arc.end, Phase::Flight(k)));
            }
            if let Some(event) = self.events.get(k) {
                out.push((event.outcome.post, Phase::Impact(k)));
            }
        }
        if self.arcs.is_empty() {
            out.push((self.terminal, Phase::Flight(0)));
        }
        out
    }

    pub fn to_csv(&self, p: &BallParams, samples_per_arc: usize) -> String {
        let mut csv = String::from(TRAJECTORY_CSV_HEADER);
        csv.push('\n');
        for (s, phase) in self.samples(p, samples_per_arc) {
            let row = [s.t, s.x, s.y, s.theta, s.vx, s.vy, s.omega]
                .map(fmt_float)
                .join(",");
            csv.push_str(&row);
            csv.push(',');
            csv.push_str(&phase.to_string());
            csv.push('\n');
        }
        csv
    }

    /// Post-impact states, the section used by return-map studies.
    pub fn section(&self) -> Vec<BallState> {
        self.events.iter().map(|e| e.outcome.post).collect()
    }
}

struct Recorder<'a> {
    p: &'a BallParams,
    arcs: Vec<FlightArc>,
    events: Vec<ImpactEvent>,
}

impl<'a> Recorder<'a> {
    fn new(p: &'a BallParams) -> Self {
        Self {
            p,
            arcs: Vec::new(),
            events: Vec::new(),
        }
    }

    fn fly(&mut self, s: &BallState, dt: f64) -> BallState {
        let arc = FlightArc::new(*s, dt.max(0.0), self.p);
        self.arcs.push(arc);
        arc.end
    }

    fn finish(self, terminal: BallState, termination: Termination) -> HybridTrajectory {
        HybridTrajectory {
            bounce_count: self.events.len(),
            arcs: self.arcs,
            events: self.events,
            terminal,
            terminal_time: terminal.t,
            termination,
        }
    }

    /// Free flight to the terminal condition.
    fn coast(mut self, s: &BallState, mode: TerminalMode, termination: Termination) -> HybridTrajectory {
        let dt = match mode {
            TerminalMode::Apex => (s.vy / self.p.gravity).max(0.0),
            TerminalMode::FixedTime(t_end) => t_end - s.t,
        };
        let end = self.fly(s, dt);
        self.finish(end, termination)
    }
}

/// Whether the disk is above `surf` at a switch instant. Right after a
/// reset the disk sits on the previous placement, so a new placement
/// through the contact point is accepted up to rounding as long as the disk
/// is leaving it.
fn placement_feasible(s: &BallState, surf: &Surface, p: &BallParams, initial: bool) -> bool {
    let h = guard_value(s, surf, p);
    if h < 0.0 {
        return true;
    }
    !initial && h <= GUARD_TOLERANCE && guard_rate(s, surf, p) < 0.0
}

/// Runs a schedule with the default executor settings.
pub fn run_schedule(
    s0: &BallState,
    sched: &ControlSchedule,
    p: &BallParams,
    mode: TerminalMode,
) -> HybridTrajectory {
    run_schedule_with(s0, sched, p, mode, &ExecConfig::default())
}

/// Drops the disk through the schedule's placements. The table jumps to
/// the next placement right after each reset. Once the budget is spent the
/// disk flies freely to the apex, or in fixed-time mode keeps the last
/// placement and any further impact before the deadline ends the run with
/// [`Termination::ZenoGuard`].
pub fn run_schedule_with(
    s0: &BallState,
    sched: &ControlSchedule,
    p: &BallParams,
    mode: TerminalMode,
    exec: &ExecConfig,
) -> HybridTrajectory {
    let mut rec = Recorder::new(p);
    let mut s = *s0;
    let deadline = match mode {
        TerminalMode::FixedTime(t_end) => t_end,
        TerminalMode::Apex => f64::INFINITY,
    };

    for table in &sched.entries[..sched.max_bounces] {
        let surf = Surface::Plane(*table);
        if !placement_feasible(&s, &surf, p, rec.events.is_empty()) {
            return rec.finish(s, Termination::InfeasiblePlacement);
        }
        let Some(dt) = time_to_impact(&s, &surf, p, exec.t_min) else {
            return rec.coast(&s, mode, Termination::NoMoreImpacts);
        };
        if s.t + dt > deadline {
            let end = rec.fly(&s, deadline - s.t);
            return rec.finish(end, Termination::TimeReached);
        }
        let pre = rec.fly(&s, dt);
        match table_reset(&pre, table, p, exec.law) {
            Ok(outcome) => {
                rec.events.push(ImpactEvent {
                    pre,
                    outcome,
                    surface: surf,
                });
                s = outcome.post;
            }
            Err(_) => return rec.finish(pre, Termination::InfeasiblePlacement),
        }
    }

    match mode {
        TerminalMode::Apex => rec.coast(&s, mode, Termination::ApexReached),
        TerminalMode::FixedTime(t_end) => {
            let last = sched.max_bounces.checked_sub(1).map(|k| sched.entries[k]);
            let excess = last
                .and_then(|table| time_to_impact(&s, &Surface::Plane(table), p, exec.t_min))
                .filter(|dt| s.t + dt <= t_end);
            match excess {
                Some(dt) => {
                    let end = rec.fly(&s, dt);
                    rec.finish(end, Termination::ZenoGuard)
                }
                None => rec.coast(&s, mode, Termination::TimeReached),
            }
        }
    }
}

/// Bounces on a fixed surface with the default executor settings.
pub fn run_surface(
    s0: &BallState,
    surf: &Surface,
    p: &BallParams,
    t_end: f64,
    max_bounces: usize,
) -> HybridTrajectory {
    run_surface_with(s0, surf, p, t_end, max_bounces, &ExecConfig::default())
}

/// Bounces on a fixed surface until absolute time `t_end` or `max_bounces`
/// impacts, whichever comes first.
pub fn run_surface_with(
    s0: &BallState,
    surf: &Surface,
    p: &BallParams,
    t_end: f64,
    max_bounces: usize,
    exec: &ExecConfig,
) -> HybridTrajectory {
    let mut rec = Recorder::new(p);
    let h0 = guard_value(s0, surf, p);
    if h0.is_nan() || h0 >= 0.0 {
        return rec.finish(*s0, Termination::InfeasiblePlacement);
    }
    let mut s = *s0;
    let mut strikes = 0;
    loop {
        if rec.events.len() == max_bounces {
            let end = rec.fly(&s, 0.0);
            return rec.finish(end, Termination::BounceLimit);
        }
        let Some(dt) = time_to_impact(&s, surf, p, exec.t_min) else {
            let end = rec.fly(&s, if t_end.is_finite() { t_end - s.t } else { 0.0 });
            return rec.finish(end, Termination::NoMoreImpacts);
        };
        if s.t + dt > t_end {
            let end = rec.fly(&s, t_end - s.t);
            return rec.finish(end, Termination::TimeReached);
        }
        if !rec.events.is_empty() && dt < exec.zeno_interval {
            strikes += 1;
        } else {
            strikes = 0;
        }
        let pre = rec.fly(&s, dt);
        if strikes >= exec.zeno_strikes {
            return rec.finish(pre, Termination::ZenoGuard);
        }
        match surface_reset(&pre, surf, p, exec.law) {
            Ok(outcome) => {
                rec.events.push(ImpactEvent {
                    pre,
                    outcome,
                    surface: *surf,
                });
                s = outcome.post;
            }
            Err(_) => return rec.finish(pre, Termination::InfeasiblePlacement),
        }
    }
}

//! Momentum map and mechanical connection of the disk's `S^1` symmetry,
//! `theta -> theta + s`, and audits of how resets treat them.
//!
//! For this action the locked inertia is the scalar `I`, the momentum map is
//! `J = I thetadot` and the connection is `A = J / I = thetadot`. Both are
//! constant in flight. Slippery resets keep them; rolling resets shift `J`
//! by `lambda R`.

use serde::{Deserialize, Serialize};

use crate::executor::HybridTrajectory;
use crate::export::fmt_float;
use crate::model::{BallParams, BallState};

pub fn locked_inertia(p: &BallParams) -> f64 {
    p.inertia
}

pub fn momentum_map(s: &BallState, p: &BallParams) -> f64 {
    p.inertia * s.omega
}

pub fn mechanical_connection(s: &BallState, p: &BallParams) -> f64 {
    momentum_map(s, p) / locked_inertia(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryEvent {
    pub index: usize,
    pub t: f64,
    pub j_pre: f64,
    pub j_post: f64,
    pub a_pre: f64,
    pub a_post: f64,
}

impl SymmetryEvent {
    pub fn jump_j(&self) -> f64 {
        self.j_post - self.j_pre
    }

    pub fn jump_a(&self) -> f64 {
        self.a_post - self.a_pre
    }
}

/// `j_series[0]` is the value on the first arc and `j_series[k + 1]` the
/// value after the k-th reset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub j_series: Vec<f64>,
    pub a_series: Vec<f64>,
    pub events: Vec<SymmetryEvent>,
    pub max_jump_j: f64,
    pub max_jump_a: f64,
}

pub const AUDIT_CSV_HEADER: &str = "event_index,t,J_pre,J_post,A_pre,A_post";

impl SymmetryReport {
    pub fn to_csv(&self) -> String {
        let mut csv = String::from(AUDIT_CSV_HEADER);
        csv.push('\n');
        for e in &self.events {
            let fields = [e.t, e.j_pre, e.j_post, e.a_pre, e.a_post].map(fmt_float);
            csv.push_str(&format!("{},{}\n", e.index, fields.join(",")));
        }
        csv
    }
}

pub fn audit_trajectory(traj: &HybridTrajectory, p: &BallParams) -> SymmetryReport {
    let start = traj
        .arcs
        .first()
        .map(|arc| arc.start)
        .unwrap_or(traj.terminal);
    let mut j_series = vec![momentum_map(&start, p)];
    let mut a_series = vec![mechanical_connection(&start, p)];
    let mut events = Vec::with_capacity(traj.events.len());
    for (index, event) in traj.events.iter().enumerate() {
        let post = &event.outcome.post;
        let record = SymmetryEvent {
            index,
            t: event.pre.t,
            j_pre: momentum_map(&event.pre, p),
            j_post: momentum_map(post, p),
            a_pre: mechanical_connection(&event.pre, p),
            a_post: mechanical_connection(post, p),
        };
        j_series.push(record.j_post);
        a_series.push(record.a_post);
        events.push(record);
    }
    let max_abs = |f: fn(&SymmetryEvent) -> f64| {
        events.iter().map(|e| f(e).abs()).fold(0.0, f64::max)
    };
    SymmetryReport {
        max_jump_j: max_abs(SymmetryEvent::jump_j),
        max_jump_a: max_abs(SymmetryEvent::jump_a),
        j_series,
        a_series,
        events,
    }
}

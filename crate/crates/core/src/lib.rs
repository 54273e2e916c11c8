//! Hybrid mechanics of a planar disk bouncing on controllable surfaces.
//!
//! The disk flies ballistically between impacts. At each impact a reset law
//! maps the pre-impact state to a post-impact one: the slippery law reflects
//! the normal momentum, the rolling law also enforces no slip at the contact
//! point, which couples spin to tangential motion and breaks the rotational
//! symmetry. On top of the executor sit a multi-start shooting solver that
//! picks table placements to reorient the disk, a controllability sweep and
//! a limit-cycle study on a parabola.

pub mod config;
pub mod error;
pub mod executor;
pub mod experiments;
pub mod export;
pub mod flight;
pub mod impact;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod shooting;
pub mod simplex;
pub mod symmetry;

pub use config::{ConfigError, ExperimentConfig};
pub use error::{ImpactError, ModelError};
pub use executor::{
    run_schedule, run_schedule_with, run_surface, run_surface_with, ControlSchedule, ExecConfig,
    HybridTrajectory, ImpactEvent, TerminalMode, Termination,
};
pub use flight::{propagate, time_to_impact, FlightArc};
pub use impact::{
    impact_equation_solve, rolling_reset, rolling_reset_flat, slippery_reset, ImpactLaw,
    ImpactOutcome,
};
pub use model::{
    energy, guard_rate, guard_value, local_contact_frame, rotate_frame, BallParams, BallState,
    Surface, TableConfig,
};
pub use shooting::{
    error_function, refine, solve, ErrorWeights, ShootingResult, SolverConfig, TargetSpec,
    TerminalKind,
};
pub use symmetry::{audit_trajectory, momentum_map, SymmetryReport};

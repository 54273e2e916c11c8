//! Batch experiments: the controllability sweep, the parabola limit-cycle
//! study, and their CSV/SVG renderers.

pub mod cycle;
pub mod svg;
pub mod sweep;

pub use cycle::{limit_cycle_study, limit_cycle_study_with, CycleError, CycleReport};
pub use svg::{render_polar_svg, render_trajectory_svg, PolarVariant};
pub use sweep::{run_sweep, run_sweep_threads, sweep_csv, SweepCell, SweepGrid};

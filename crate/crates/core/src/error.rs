use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be finite and positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

/// Reasons a reset map cannot be applied.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImpactError {
    #[error("state is not on the guard (h = {0:e})")]
    OffGuard(f64),
    #[error("state is not moving into the surface (guard rate {0})")]
    NotApproaching(f64),
    #[error("surface is moving at impact (du = {du}, dv = {dv})")]
    MovingSurface { du: f64, dv: f64 },
    #[error("flat rolling reset needs a level table, got u = {0}")]
    TiltedTable(f64),
    #[error("no admissible elastic impact: radicand {0} is negative")]
    NegativeRadicand(f64),
    #[error("impact equations have no departing solution")]
    NoDepartingSolution,
}

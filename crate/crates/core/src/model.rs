//! Domain types for the planar disk and the surfaces it strikes.
//!
//! The disk lives on `R^2 x R` with coordinates `(x, y, theta)`. The
//! orientation is kept as a plain real number and is never wrapped, so a
//! trajectory that spins by a full turn ends at `theta = 2 pi`, not `0`.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Physical constants of the disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallParams {
    /// Mass (kg).
    pub mass: f64,
    /// Moment of inertia about the center (kg m^2).
    pub inertia: f64,
    /// Radius (m).
    pub radius: f64,
    /// Gravitational acceleration (m/s^2).
    pub gravity: f64,
}

impl BallParams {
    pub fn new(mass: f64, inertia: f64, radius: f64, gravity: f64) -> Result<Self, ModelError> {
        let params = Self {
            mass,
            inertia,
            radius,
            gravity,
        };
        params.validate()?;
        Ok(params)
    }

    /// Uniform disk, `I = m R^2 / 2`.
    pub fn uniform_disk(mass: f64, radius: f64, gravity: f64) -> Result<Self, ModelError> {
        Self::new(mass, 0.5 * mass * radius * radius, radius, gravity)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("mass", self.mass),
            ("inertia", self.inertia),
            ("radius", self.radius),
            ("gravity", self.gravity),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        Ok(())
    }

    /// `I + m R^2`, the inertia about the contact point.
    pub fn contact_inertia(&self) -> f64 {
        self.inertia + self.mass * self.radius * self.radius
    }
}

impl Default for BallParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            inertia: 0.5 * 0.1 * 0.1,
            radius: 0.1,
            gravity: 9.81,
        }
    }
}

/// A point of the tangent bundle together with the absolute time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BallState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
    pub t: f64,
}

impl BallState {
    pub fn at_rest(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta,
            ..Self::default()
        }
    }

    /// `(p_x, p_y, p_theta) = (m xdot, m ydot, I thetadot)`.
    pub fn momenta(&self, p: &BallParams) -> [f64; 3] {
        [p.mass * self.vx, p.mass * self.vy, p.inertia * self.omega]
    }

    pub fn velocity(&self) -> [f64; 3] {
        [self.vx, self.vy, self.omega]
    }

    pub fn with_velocity(mut self, v: [f64; 3]) -> Self {
        self.vx = v[0];
        self.vy = v[1];
        self.omega = v[2];
        self
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.theta, self.vx, self.vy, self.omega, self.t]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Placement of the controlled table: tilt `u`, height `v`, and their
/// rates at the impact instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TableConfig {
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
}

impl TableConfig {
    pub fn stationary(u: f64, v: f64) -> Self {
        Self {
            u,
            v,
            du: 0.0,
            dv: 0.0,
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.du == 0.0 && self.dv == 0.0
    }
}

/// Surfaces the disk can strike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Surface {
    Plane(TableConfig),
    /// `y = alpha x^2`, with the disk center held a vertical distance `R`
    /// above it at contact.
    Parabola(f64),
}

impl Surface {
    pub fn parabola(alpha: f64) -> Result<Self, ModelError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(ModelError::NonPositive {
                name: "alpha",
                value: alpha,
            });
        }
        Ok(Self::Parabola(alpha))
    }

    pub fn flat() -> Self {
        Self::Plane(TableConfig::default())
    }

    pub fn is_stationary(&self) -> bool {
        match self {
            Self::Plane(table) => table.is_stationary(),
            Self::Parabola(_) => true,
        }
    }

    /// Spatial part of `dh`: `(dh/dx, dh/dy, dh/dtheta)`.
    pub fn guard_covector(&self, s: &BallState) -> [f64; 3] {
        match *self {
            Self::Plane(table) => [table.u.sin(), -table.u.cos(), 0.0],
            Self::Parabola(alpha) => [2.0 * alpha * s.x, -1.0, 0.0],
        }
    }

    /// Explicit time dependence of the guard, `dh/dt`, coming from the
    /// table's motion at the impact instant.
    pub fn guard_time_rate(&self, s: &BallState) -> f64 {
        match *self {
            Self::Plane(table) => {
                let (sin_u, cos_u) = table.u.sin_cos();
                (s.x * cos_u + s.y * sin_u) * table.du + table.dv
            }
            Self::Parabola(_) => 0.0,
        }
    }

    /// Rolling-without-slipping one-form `R dtheta + cos(phi) dx + sin(phi) dy`
    /// where `phi` is the local tangent angle at the contact.
    pub fn rolling_covector(&self, s: &BallState, p: &BallParams) -> [f64; 3] {
        let (sin_phi, cos_phi) = local_contact_frame(s, self).sin_cos();
        [cos_phi, sin_phi, p.radius]
    }
}

/// Kinetic and potential energy of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

/// Signed guard. Negative while the disk is clear of the surface.
pub fn guard_value(s: &BallState, surf: &Surface, p: &BallParams) -> f64 {
    match *surf {
        Surface::Plane(table) => {
            let (sin_u, cos_u) = table.u.sin_cos();
            s.x * sin_u - s.y * cos_u + p.radius + table.v
        }
        Surface::Parabola(alpha) => alpha * s.x * s.x - s.y + p.radius,
    }
}

/// Total derivative of the guard along the state's velocity. An impact is
/// admissible only when this is positive.
pub fn guard_rate(s: &BallState, surf: &Surface, _p: &BallParams) -> f64 {
    let dh = surf.guard_covector(s);
    dh[0] * s.vx + dh[1] * s.vy + surf.guard_time_rate(s)
}

pub fn energy(s: &BallState, p: &BallParams) -> EnergyBreakdown {
    let kinetic =
        0.5 * p.mass * (s.vx * s.vx + s.vy * s.vy) + 0.5 * p.inertia * s.omega * s.omega;
    let potential = p.mass * p.gravity * s.y;
    EnergyBreakdown {
        kinetic,
        potential,
        total: kinetic + potential,
    }
}

/// Rotates position and linear velocity by `-phi` about the origin.
/// `theta` and `omega` are left alone.
pub fn rotate_frame(s: &BallState, phi: f64) -> BallState {
    let (sin_phi, cos_phi) = phi.sin_cos();
    let rot = |a: f64, b: f64| (a * cos_phi + b * sin_phi, -a * sin_phi + b * cos_phi);
    let (x, y) = rot(s.x, s.y);
    let (vx, vy) = rot(s.vx, s.vy);
    BallState {
        x,
        y,
        vx,
        vy,
        ..*s
    }
}

/// Angle of the surface tangent at the contact. Rotating the state by this
/// angle makes the tangent horizontal with the outward normal along `+y`.
pub fn local_contact_frame(s: &BallState, surf: &Surface) -> f64 {
    match *surf {
        Surface::Plane(table) => table.u,
        Surface::Parabola(alpha) => (2.0 * alpha * s.x).atan(),
    }
}

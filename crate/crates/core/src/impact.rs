//! Reset maps applied when the disk reaches a surface.
//!
//! Every reset is elastic. The slippery law reflects the metric-normal part
//! of the velocity and leaves the spin alone. The rolling law adds the
//! no-slip constraint `R thetadot + t . v = 0` at the contact, which couples
//! spin to tangential motion and breaks conservation of `I thetadot`.
//!
//! Three routes compute the rolling reset:
//! - [`rolling_reset_flat`]: closed form for a level table, moving or not;
//! - [`rolling_reset`]: the closed form conjugated by a rotation into the
//!   local contact frame (stationary surfaces);
//! - [`impact_equation_solve`]: the raw multiplier system, solved as a
//!   quadratic in the normal multiplier. This is the only route for a tilted
//!   table that is moving at the impact instant.

use serde::{Deserialize, Serialize};

use crate::error::ImpactError;
use crate::model::{
    energy, guard_rate, guard_value, local_contact_frame, rotate_frame, BallParams, BallState,
    Surface, TableConfig,
};

/// Slack allowed on `|h|` for a state to count as being on the guard.
pub const GUARD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ImpactLaw {
    Slippery,
    #[default]
    Rolling,
}

/// Result of a reset, with the multipliers that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactOutcome {
    pub post: BallState,
    /// Multiplier on `d_x h`.
    pub epsilon: f64,
    /// Multiplier on the rolling constraint. Zero for slippery resets.
    pub lambda: f64,
    /// `E+ - E-`.
    pub energy_delta: f64,
}

impl ImpactOutcome {
    fn new(pre: &BallState, post: BallState, epsilon: f64, lambda: f64, p: &BallParams) -> Self {
        Self {
            post,
            epsilon,
            lambda,
            energy_delta: energy(&post, p).total - energy(pre, p).total,
        }
    }
}

fn mass_diag(p: &BallParams) -> [f64; 3] {
    [p.mass, p.mass, p.inertia]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn raise(covector: &[f64; 3], p: &BallParams) -> [f64; 3] {
    let m = mass_diag(p);
    [covector[0] / m[0], covector[1] / m[1], covector[2] / m[2]]
}

fn check_impacting(s: &BallState, surf: &Surface, p: &BallParams) -> Result<(), ImpactError> {
    let h = guard_value(s, surf, p);
    if h.abs() > GUARD_TOLERANCE {
        return Err(ImpactError::OffGuard(h));
    }
    let rate = guard_rate(s, surf, p);
    if rate.is_nan() || rate <= 0.0 {
        return Err(ImpactError::NotApproaching(rate));
    }
    Ok(())
}

fn check_stationary(surf: &Surface) -> Result<(), ImpactError> {
    match surf {
        Surface::Plane(table) if !table.is_stationary() => Err(ImpactError::MovingSurface {
            du: table.du,
            dv: table.dv,
        }),
        _ => Ok(()),
    }
}

/// Specular reflection in the kinetic metric `diag(m, m, I)` against a
/// stationary surface.
pub fn slippery_reset(
    s: &BallState,
    surf: &Surface,
    p: &BallParams,
) -> Result<ImpactOutcome, ImpactError> {
    check_stationary(surf)?;
    check_impacting(s, surf, p)?;
    Ok(slippery_reflect(s, surf, p))
}

/// The reflection behind [`slippery_reset`] without the guard checks. It is
/// an involution.
pub fn slippery_reflect(s: &BallState, surf: &Surface, p: &BallParams) -> ImpactOutcome {
    let dh = surf.guard_covector(s);
    let grad = raise(&dh, p);
    let scale = dot(&dh, &s.velocity()) / dot(&dh, &grad);
    let mut post = *s;
    post.vx -= 2.0 * scale * grad[0];
    post.vy -= 2.0 * scale * grad[1];
    // dh never has a dtheta component, so the spin is left bit-for-bit
    if dh[2] != 0.0 {
        post.omega -= 2.0 * scale * grad[2];
    }
    ImpactOutcome::new(s, post, -2.0 * scale, 0.0, p)
}

/// Rolling reset in closed form for a level table. `w = du x + dv` is the
/// table's normal speed at the contact and injects `epsilon * w` of energy.
fn flat_rolling(s: &BallState, w: f64, p: &BallParams) -> Result<ImpactOutcome, ImpactError> {
    let [px, py, ptheta] = s.momenta(p);
    let (m, inertia, r) = (p.mass, p.inertia, p.radius);
    let k = p.contact_inertia();
    let slip = r * px - ptheta;

    let px_post = r * m / k * slip;
    let ptheta_post = inertia / k * (ptheta - r * px);
    let relative = py - m * w;
    let radicand =
        px * px + relative * relative + m / inertia * ptheta * ptheta - m / k * slip * slip;
    if radicand < 0.0 {
        return Err(ImpactError::NegativeRadicand(radicand));
    }
    let py_post = radicand.sqrt() + m * w;

    let post = s.with_velocity([px_post / m, py_post / m, ptheta_post / inertia]);
    Ok(ImpactOutcome::new(s, post, -(py_post - py), px_post - px, p))
}

/// Rolling reset on a level table (`u = 0`); the table may be moving.
pub fn rolling_reset_flat(
    s: &BallState,
    table: &TableConfig,
    p: &BallParams,
) -> Result<ImpactOutcome, ImpactError> {
    if table.u != 0.0 {
        return Err(ImpactError::TiltedTable(table.u));
    }
    check_impacting(s, &Surface::Plane(*table), p)?;
    flat_rolling(s, table.du * s.x + table.dv, p)
}

/// Rolling reset against any stationary surface: rotate into the contact
/// frame, apply the flat closed form, rotate back.
pub fn rolling_reset(
    s: &BallState,
    surf: &Surface,
    p: &BallParams,
) -> Result<ImpactOutcome, ImpactError> {
    check_stationary(surf)?;
    check_impacting(s, surf, p)?;
    let phi = local_contact_frame(s, surf);
    let local = flat_rolling(&rotate_frame(s, phi), 0.0, p)?;
    let mut post = rotate_frame(&local.post, -phi);
    post.x = s.x;
    post.y = s.y;
    // the flat frame normalises the normal covector; undo that for epsilon
    let dh = surf.guard_covector(s);
    let normal_len = dh[0].hypot(dh[1]);
    Ok(ImpactOutcome::new(
        s,
        post,
        local.epsilon / normal_len,
        local.lambda,
        p,
    ))
}

/// Rolling reset by solving the multiplier equations directly.
pub fn impact_equation_solve(
    s: &BallState,
    surf: &Surface,
    p: &BallParams,
) -> Result<ImpactOutcome, ImpactError> {
    solve_impact_equations(s, surf, p, ImpactLaw::Rolling)
}

/// Solves
///
/// ```text
/// M (v+ - v-) = eps dh + lam eta
/// -E+ + E-    = eps dh/dt
/// eta(v+)     = 0
/// ```
///
/// for `(v+, eps, lam)`. With [`ImpactLaw::Slippery`] the constraint row and
/// `lam` are dropped. `lam` is affine in `eps`, so the energy row is a
/// quadratic in `eps`; the root whose post-state leaves the surface is kept.
pub fn solve_impact_equations(
    s: &BallState,
    surf: &Surface,
    p: &BallParams,
    law: ImpactLaw,
) -> Result<ImpactOutcome, ImpactError> {
    check_impacting(s, surf, p)?;
    let mass = mass_diag(p);
    let v = s.velocity();
    let dh = surf.guard_covector(s);
    let dh_dt = surf.guard_time_rate(s);
    let grad_h = raise(&dh, p);

    // lam = lam0 + eps * lam1
    let (eta, lam0, lam1) = match law {
        ImpactLaw::Slippery => ([0.0; 3], 0.0, 0.0),
        ImpactLaw::Rolling => {
            let eta = surf.rolling_covector(s, p);
            let grad_eta = raise(&eta, p);
            let norm = dot(&eta, &grad_eta);
            (eta, -dot(&eta, &v) / norm, -dot(&eta, &grad_h) / norm)
        }
    };
    let grad_eta = raise(&eta, p);
    // v+ = base + eps * dir
    let shift: [f64; 3] = std::array::from_fn(|i| lam0 * grad_eta[i]);
    let base: [f64; 3] = std::array::from_fn(|i| v[i] + shift[i]);
    let dir: [f64; 3] = std::array::from_fn(|i| grad_h[i] + lam1 * grad_eta[i]);

    let qa: f64 = (0..3).map(|i| 0.5 * mass[i] * dir[i] * dir[i]).sum();
    let qb: f64 = (0..3).map(|i| mass[i] * base[i] * dir[i]).sum::<f64>() + dh_dt;
    let qc: f64 = (0..3)
        .map(|i| 0.5 * mass[i] * shift[i] * (base[i] + v[i]))
        .sum();

    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(ImpactError::NoDepartingSolution);
    }
    let q = -0.5 * (qb + disc.sqrt().copysign(qb));
    let mut roots = vec![q / qa];
    if q != 0.0 {
        roots.push(qc / q);
    }

    let departing = |eps: f64| {
        let post: [f64; 3] = std::array::from_fn(|i| base[i] + eps * dir[i]);
        let rate = dot(&dh, &post) + dh_dt;
        (eps < 0.0 && rate < 0.0).then_some((eps, post, rate))
    };
    let (eps, post, _) = roots
        .into_iter()
        .filter_map(departing)
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .ok_or(ImpactError::NoDepartingSolution)?;

    let lam = lam0 + eps * lam1;
    let mut post_state = s.with_velocity(post);
    if law == ImpactLaw::Slippery && dh[2] == 0.0 {
        post_state.omega = s.omega;
    }
    Ok(ImpactOutcome::new(s, post_state, eps, lam, p))
}

/// Reset against a table placement under the given law. Stationary tables
/// take the closed forms; moving tables fall back to the multiplier solve
/// unless the table is level.
pub fn table_reset(
    s: &BallState,
    table: &TableConfig,
    p: &BallParams,
    law: ImpactLaw,
) -> Result<ImpactOutcome, ImpactError> {
    let surf = Surface::Plane(*table);
    match law {
        ImpactLaw::Slippery if table.is_stationary() => slippery_reset(s, &surf, p),
        ImpactLaw::Slippery => solve_impact_equations(s, &surf, p, law),
        ImpactLaw::Rolling if table.is_stationary() => rolling_reset(s, &surf, p),
        ImpactLaw::Rolling if table.u == 0.0 => rolling_reset_flat(s, table, p),
        ImpactLaw::Rolling => impact_equation_solve(s, &surf, p),
    }
}

/// Reset against any surface under the given law.
pub fn surface_reset(
    s: &BallState,
    surf: &Surface,
    p: &BallParams,
    law: ImpactLaw,
) -> Result<ImpactOutcome, ImpactError> {
    match surf {
        Surface::Plane(table) => table_reset(s, table, p, law),
        Surface::Parabola(_) => match law {
            ImpactLaw::Slippery => slippery_reset(s, surf, p),
            ImpactLaw::Rolling => rolling_reset(s, surf, p),
        },
    }
}

/// Residuals of the five impact equations for a computed outcome:
/// three momentum rows, the energy row, and the post-impact constraint.
/// For slippery outcomes the constraint row is reported as zero.
pub fn impact_residuals(
    pre: &BallState,
    outcome: &ImpactOutcome,
    surf: &Surface,
    p: &BallParams,
    law: ImpactLaw,
) -> [f64; 5] {
    let mass = mass_diag(p);
    let dh = surf.guard_covector(pre);
    let eta = match law {
        ImpactLaw::Rolling => surf.rolling_covector(pre, p),
        ImpactLaw::Slippery => [0.0; 3],
    };
    let v0 = pre.velocity();
    let v1 = outcome.post.velocity();
    let momentum: [f64; 3] = std::array::from_fn(|i| {
        mass[i] * (v1[i] - v0[i]) - outcome.epsilon * dh[i] - outcome.lambda * eta[i]
    });
    let kinetic = |v: &[f64; 3]| (0..3).map(|i| 0.5 * mass[i] * v[i] * v[i]).sum::<f64>();
    let energy_row = -kinetic(&v1) + kinetic(&v0) - outcome.epsilon * surf.guard_time_rate(pre);
    [
        momentum[0],
        momentum[1],
        momentum[2],
        energy_row,
        dot(&eta, &v1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn unit() -> BallParams {
        BallParams {
            mass: 1.0,
            inertia: 1.0,
            radius: 1.0,
            gravity: 9.81,
        }
    }

    /// Disk resting on a level table at height zero with the given momenta.
    fn on_flat(p: &BallParams, momenta: [f64; 3]) -> BallState {
        BallState {
            y: p.radius,
            ..BallState::default()
        }
        .with_velocity([
            momenta[0] / p.mass,
            momenta[1] / p.mass,
            momenta[2] / p.inertia,
        ])
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn slippery_flat_reflections() {
        let p = BallParams::default();
        let s = on_flat(&p, [3.0, -4.0, 7.0 * p.inertia]);
        let out = slippery_reset(&s, &Surface::flat(), &p).unwrap();
        assert_eq!(out.post.velocity(), [3.0, 4.0, s.omega]);
        assert_eq!(out.lambda, 0.0);
        assert_eq!(out.epsilon, -8.0);

        let s = on_flat(&p, [0.0, -2.0, 5.0 * p.inertia]);
        let out = slippery_reset(&s, &Surface::flat(), &p).unwrap();
        assert_eq!(out.post.velocity(), [0.0, 2.0, s.omega]);
        assert_eq!(out.post.momenta(&p)[2], s.momenta(&p)[2]);
    }

    #[test]
    fn slippery_against_wall() {
        // u = -pi/2 is a wall at x = -v, with the disk on its right.
        let p = BallParams::default();
        let wall = Surface::Plane(TableConfig::stationary(-FRAC_PI_2, 0.0));
        let s = BallState {
            x: p.radius,
            y: 3.0,
            ..BallState::default()
        }
        .with_velocity([-2.0, 1.0, 0.0]);
        assert!(guard_rate(&s, &wall, &p) > 0.0);
        let out = slippery_reset(&s, &wall, &p).unwrap();
        assert_close(out.post.vx, 2.0, 1e-15);
        assert_close(out.post.vy, 1.0, 1e-15);
        // mirror image with the wall on the other side
        let wall = Surface::Plane(TableConfig::stationary(FRAC_PI_2, 0.0));
        let s = BallState {
            x: -p.radius,
            y: 3.0,
            ..BallState::default()
        }
        .with_velocity([2.0, 1.0, 0.0]);
        assert!(guard_value(&s, &wall, &p).abs() < 1e-15);
        let out = slippery_reset(&s, &wall, &p).unwrap();
        assert_close(out.post.vx, -2.0, 1e-15);
        assert_close(out.post.vy, 1.0, 1e-15);
    }

    #[test]
    fn slippery_rejects_departing_and_moving() {
        let p = BallParams::default();
        let rising = on_flat(&p, [0.0, 1.0, 0.0]);
        assert!(matches!(
            slippery_reset(&rising, &Surface::flat(), &p),
            Err(ImpactError::NotApproaching(_))
        ));
        let moving = Surface::Plane(TableConfig {
            dv: 0.1,
            ..TableConfig::default()
        });
        let falling = on_flat(&p, [0.0, -1.0, 0.0]);
        assert!(matches!(
            slippery_reset(&falling, &moving, &p),
            Err(ImpactError::MovingSurface { .. })
        ));
        let above = BallState { y: 0.5, ..falling };
        assert!(matches!(
            slippery_reset(&above, &Surface::flat(), &p),
            Err(ImpactError::OffGuard(_))
        ));
    }

    #[test]
    fn slippery_reflection_is_an_involution() {
        let p = BallParams::default();
        let surf = Surface::Parabola(0.7);
        let s = BallState {
            x: 0.4,
            y: 0.7 * 0.16 + p.radius,
            vx: 1.3,
            vy: -2.1,
            omega: 4.0,
            ..BallState::default()
        };
        let twice = slippery_reflect(&slippery_reflect(&s, &surf, &p).post, &surf, &p).post;
        for (a, b) in twice.velocity().iter().zip(s.velocity()) {
            assert_close(*a, b, 1e-12);
        }
    }

    #[test]
    fn rolling_flat_worked_example() {
        let p = unit();
        let s = on_flat(&p, [1.0, -1.0, 0.0]);
        let out = rolling_reset_flat(&s, &TableConfig::default(), &p).unwrap();
        let [px, py, pt] = out.post.momenta(&p);
        assert_close(px, 0.5, 1e-12);
        assert_close(py, 1.5f64.sqrt(), 1e-12);
        assert_close(py, 1.224_744_9, 1e-7);
        assert_close(pt, -0.5, 1e-12);
        // no-slip after impact
        assert_close(p.radius * out.post.omega + out.post.vx, 0.0, 1e-15);
        assert_close(out.energy_delta, 0.0, 1e-12);
    }

    #[test]
    fn rolling_flat_pure_bounce() {
        let p = unit();
        let s = on_flat(&p, [0.0, -2.0, 0.0]);
        let out = rolling_reset_flat(&s, &TableConfig::default(), &p).unwrap();
        assert_eq!(out.post.momenta(&p), [0.0, 2.0, 0.0]);
        assert_eq!(out.lambda, 0.0);
    }

    #[test]
    fn rolling_flat_moving_table_injects_energy() {
        let p = unit();
        let s = on_flat(&p, [0.0, -2.0, 0.0]);
        let table = TableConfig {
            dv: 0.5,
            ..TableConfig::default()
        };
        let out = rolling_reset_flat(&s, &table, &p).unwrap();
        assert_close(out.post.momenta(&p)[1], 3.0, 1e-12);
        assert_close(out.energy_delta, 2.5, 1e-12);
        assert_close(out.epsilon, -5.0, 1e-12);
        // the multiplier route agrees
        let solved = impact_equation_solve(&s, &Surface::Plane(table), &p).unwrap();
        assert_close(solved.post.vy, 3.0, 1e-10);
        assert_close(solved.epsilon, -5.0, 1e-10);
    }

    #[test]
    fn negative_radicand_is_reported_not_clamped() {
        // The radicand equals (p_y - m w)^2 + (I p_x + m R p_theta)^2 / (I (I + m R^2)),
        // so it only goes negative through rounding: a disk that is already
        // rolling and barely approaching the table.
        use rand::{Rng, SeedableRng};
        let p = BallParams::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut found = 0;
        for _ in 0..100_000 {
            let vx: f64 = rng.random_range(-10.0..10.0);
            let omega = -vx / p.radius * (1.0 + rng.random_range(-1e-12..1e-12));
            let s = BallState {
                y: p.radius,
                vx,
                vy: -1e-9,
                omega,
                ..BallState::default()
            };
            match rolling_reset_flat(&s, &TableConfig::default(), &p) {
                Err(ImpactError::NegativeRadicand(r)) => {
                    assert!(r < 0.0 && r > -1e-12);
                    found += 1;
                }
                Ok(out) => assert!(out.post.vy >= 0.0),
                Err(e) => panic!("unexpected {e}"),
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn rolling_rotation_reduces_to_flat() {
        let p = unit();
        let s = on_flat(&p, [1.0, -1.0, 0.0]);
        let flat = rolling_reset_flat(&s, &TableConfig::default(), &p).unwrap();
        let rotated = rolling_reset(&s, &Surface::flat(), &p).unwrap();
        assert_eq!(flat, rotated);
        let vertex = rolling_reset(&s, &Surface::Parabola(0.5), &p).unwrap();
        assert_eq!(flat.post, vertex.post);
    }

    #[test]
    fn rolling_tilted_matches_multiplier_solve() {
        let p = unit();
        let table = TableConfig::stationary(FRAC_PI_6, 0.2);
        let surf = Surface::Plane(table);
        // place the center on the guard at x = 0.5
        let x = 0.5;
        let y = (x * table.u.sin() + p.radius + table.v) / table.u.cos();
        let s = BallState {
            x,
            y,
            vx: 0.7,
            vy: -3.0,
            omega: 1.5,
            ..BallState::default()
        };
        assert!(guard_rate(&s, &surf, &p) > 0.0);
        let a = rolling_reset(&s, &surf, &p).unwrap();
        let b = impact_equation_solve(&s, &surf, &p).unwrap();
        for (x, y) in a.post.velocity().iter().zip(b.post.velocity()) {
            assert_close(*x, y, 1e-10);
        }
        assert_close(a.epsilon, b.epsilon, 1e-10);
        assert_close(a.lambda, b.lambda, 1e-10);
        for r in impact_residuals(&s, &a, &surf, &p, ImpactLaw::Rolling) {
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_solve_reproduces_flat_examples() {
        let p = unit();
        for momenta in [[1.0, -1.0, 0.0], [0.0, -2.0, 0.0], [2.0, -0.5, 3.0]] {
            let s = on_flat(&p, momenta);
            let a = rolling_reset_flat(&s, &TableConfig::default(), &p).unwrap();
            let b = impact_equation_solve(&s, &Surface::flat(), &p).unwrap();
            for (x, y) in a.post.velocity().iter().zip(b.post.velocity()) {
                assert_close(*x, y, 1e-10);
            }
        }
    }

    #[test]
    fn identity_is_never_selected() {
        // Already rolling and only touching: the identity solves every
        // row except departure, so the solver must reflect instead.
        let p = unit();
        let s = on_flat(&p, [1.0, -2.0, -1.0]);
        assert_close(p.radius * s.omega + s.vx, 0.0, 0.0);
        let out = impact_equation_solve(&s, &Surface::flat(), &p).unwrap();
        assert!(out.epsilon < 0.0);
        assert_close(out.post.vy, 2.0, 1e-12);
        assert_close(out.lambda, 0.0, 1e-12);
    }

    #[test]
    fn multiplier_solve_slippery_matches_reflection() {
        let p = BallParams::default();
        let table = TableConfig::stationary(-0.8, 0.1);
        let surf = Surface::Plane(table);
        let x = -0.3;
        let y = (x * table.u.sin() + p.radius + table.v) / table.u.cos();
        let s = BallState {
            x,
            y,
            vx: -2.0,
            vy: -1.0,
            omega: 9.0,
            ..BallState::default()
        };
        let a = slippery_reset(&s, &surf, &p).unwrap();
        let b = solve_impact_equations(&s, &surf, &p, ImpactLaw::Slippery).unwrap();
        for (x, y) in a.post.velocity().iter().zip(b.post.velocity()) {
            assert_close(*x, y, 1e-12);
        }
        assert_close(a.epsilon, b.epsilon, 1e-12);
        assert_eq!(b.post.omega, s.omega);
    }

    #[test]
    fn moving_tilted_table_goes_through_solver() {
        let p = BallParams::default();
        let table = TableConfig {
            u: 0.3,
            v: 0.0,
            du: 0.4,
            dv: 0.2,
        };
        let x = 0.2;
        let y = (x * table.u.sin() + p.radius + table.v) / table.u.cos();
        let s = BallState {
            x,
            y,
            vx: 0.5,
            vy: -2.0,
            omega: -3.0,
            ..BallState::default()
        };
        let out = table_reset(&s, &table, &p, ImpactLaw::Rolling).unwrap();
        let surf = Surface::Plane(table);
        assert!(guard_rate(&out.post, &surf, &p) < 0.0);
        for r in impact_residuals(&s, &out, &surf, &p, ImpactLaw::Rolling) {
            assert!(r.abs() < 1e-12, "{r}");
        }
        assert!(out.energy_delta > 0.0);
    }
}

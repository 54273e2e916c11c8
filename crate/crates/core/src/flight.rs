//! Closed-form ballistic flight between impacts.

use serde::{Deserialize, Serialize};

use crate::model::{guard_value, BallParams, BallState, Surface};

/// One stretch of free flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightArc {
    pub start: BallState,
    pub duration: f64,
    pub end: BallState,
}

impl FlightArc {
    pub fn new(start: BallState, duration: f64, p: &BallParams) -> Self {
        Self {
            start,
            duration,
            end: propagate(&start, duration, p),
        }
    }

    /// State at `tau` seconds into the arc.
    pub fn sample(&self, tau: f64, p: &BallParams) -> BallState {
        propagate(&self.start, tau, p)
    }
}

/// Exact flow of `m xdd = 0, m ydd = -m g, I thetadd = 0`.
pub fn propagate(s: &BallState, dt: f64, p: &BallParams) -> BallState {
    debug_assert!(dt >= 0.0, "negative flight time {dt}");
    let g = p.gravity;
    BallState {
        x: s.x + s.vx * dt,
        y: s.y + s.vy * dt - 0.5 * g * dt * dt,
        theta: s.theta + s.omega * dt,
        vx: s.vx,
        vy: s.vy - g * dt,
        omega: s.omega,
        t: s.t + dt,
    }
}

/// Coefficients `[a, b, c]` of `h(t) = a t^2 + b t + c` along the ballistic
/// arc starting at `s`, with the surface held still.
pub fn guard_polynomial(s: &BallState, surf: &Surface, p: &BallParams) -> [f64; 3] {
    let c = guard_value(s, surf, p);
    match *surf {
        Surface::Plane(table) => {
            let (sin_u, cos_u) = table.u.sin_cos();
            [
                0.5 * p.gravity * cos_u,
                s.vx * sin_u - s.vy * cos_u,
                c,
            ]
        }
        Surface::Parabola(alpha) => [
            alpha * s.vx * s.vx + 0.5 * p.gravity,
            2.0 * alpha * s.x * s.vx - s.vy,
            c,
        ],
    }
}

/// Earliest flight time `t* > t_min` at which the disk reaches the surface
/// while moving into it, or `None` if it never does.
pub fn time_to_impact(s: &BallState, surf: &Surface, p: &BallParams, t_min: f64) -> Option<f64> {
    let [a, b, c] = guard_polynomial(s, surf, p);
    let admissible = |t: f64| t > t_min && 2.0 * a * t + b > 0.0;

    if a == 0.0 {
        if b > 0.0 {
            return Some(-c / b).filter(|&t| t > t_min);
        }
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    let mut roots = [q / a, f64::NAN];
    if q != 0.0 {
        roots[1] = c / q;
    }
    roots
        .into_iter()
        .filter(|t| t.is_finite() && admissible(*t))
        .min_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{energy, guard_rate, TableConfig};
    use crate::oracle::time_to_impact_oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn propagate_examples() {
        let p = BallParams::default();
        let rest = BallState::at_rest(0.0, 1.0, 0.0);
        assert_eq!(propagate(&rest, 0.0, &p), rest);
        let later = propagate(&rest, 0.2, &p);
        assert!((later.y - 0.8038).abs() < 1e-12);
        assert!((later.vy + 1.962).abs() < 1e-12);
        let spinning = BallState {
            omega: 3.0,
            ..rest
        };
        assert_eq!(propagate(&spinning, 0.5, &p).theta, 1.5);
    }

    #[test]
    fn drop_from_rest_hits_at_closed_form_time() {
        let p = BallParams::default();
        let t = time_to_impact(&BallState::at_rest(0.0, 1.0, 0.0), &Surface::flat(), &p, 0.0)
            .unwrap();
        let expected = (2.0 * 0.9 / 9.81f64).sqrt();
        assert!((t - expected).abs() < 1e-12);
        assert!((t - 0.428_353).abs() < 1e-6);
    }

    #[test]
    fn rising_off_contact_returns_after_full_arc() {
        let p = BallParams::default();
        let s = BallState {
            y: 0.1,
            vy: 5.0,
            ..BallState::default()
        };
        let t = time_to_impact(&s, &Surface::flat(), &p, 1e-9).unwrap();
        assert!((t - 10.0 / 9.81).abs() < 1e-12);
        assert!((t - 1.019_37).abs() < 1e-5);
    }

    #[test]
    fn no_gravity_moving_away_never_hits() {
        let p = BallParams {
            gravity: 0.0,
            ..BallParams::default()
        };
        let s = BallState {
            y: 1.0,
            vx: 2.0,
            vy: 1.0,
            ..BallState::default()
        };
        assert_eq!(time_to_impact(&s, &Surface::flat(), &p, 0.0), None);
        assert_eq!(time_to_impact_oracle(&s, &Surface::flat(), &p, 0.0), None);
    }

    #[test]
    fn no_gravity_moving_toward_hits_linearly() {
        let p = BallParams {
            gravity: 0.0,
            ..BallParams::default()
        };
        let s = BallState {
            y: 1.1,
            vy: -2.0,
            ..BallState::default()
        };
        let t = time_to_impact(&s, &Surface::flat(), &p, 0.0).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inverted_table_never_reached_from_above() {
        // cos u < 0: the guard side faces down, so a disk on the negative
        // side accelerates away from it.
        let p = BallParams::default();
        let table = Surface::Plane(TableConfig::stationary(3.0, 0.0));
        let s = BallState {
            y: -1.0,
            ..BallState::default()
        };
        assert!(guard_value(&s, &table, &p) < 0.0);
        assert_eq!(time_to_impact(&s, &table, &p, 0.0), None);
        assert_eq!(time_to_impact_oracle(&s, &table, &p, 0.0), None);
    }

    fn random_state(rng: &mut ChaCha8Rng, p: &BallParams) -> BallState {
        BallState {
            x: rng.random_range(-2.0..2.0),
            y: rng.random_range(p.radius..5.0),
            theta: 0.0,
            vx: rng.random_range(-10.0..10.0),
            vy: rng.random_range(-10.0..10.0),
            omega: rng.random_range(-20.0..20.0),
            t: 0.0,
        }
    }

    #[test]
    fn agrees_with_bracketing_oracle_on_random_states() {
        let p = BallParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let surfaces = [
            Surface::flat(),
            Surface::Plane(TableConfig::stationary(0.4, -0.3)),
            Surface::Plane(TableConfig::stationary(-1.0, 0.2)),
            Surface::Parabola(0.5),
            Surface::Parabola(2.0),
        ];
        let mut checked = 0;
        while checked < 1000 {
            let surf = surfaces[checked % surfaces.len()];
            let s = random_state(&mut rng, &p);
            if guard_value(&s, &surf, &p) > 0.0 {
                continue;
            }
            let fast = time_to_impact(&s, &surf, &p, 0.0);
            let slow = time_to_impact_oracle(&s, &surf, &p, 0.0);
            match (fast, slow) {
                (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9, "{s:?} {surf:?}: {a} vs {b}"),
                (None, None) => {}
                other => panic!("existence mismatch {other:?} for {s:?} on {surf:?}"),
            }
            checked += 1;
        }
    }

    #[test]
    fn arcs_conserve_energy_and_never_tunnel() {
        let p = BallParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let surf = Surface::Parabola(0.5);
        for _ in 0..200 {
            let s = random_state(&mut rng, &p);
            if guard_value(&s, &surf, &p) >= 0.0 {
                continue;
            }
            let t = time_to_impact(&s, &surf, &p, 0.0).expect("parabola always caught");
            let arc = FlightArc::new(s, t, &p);
            let e0 = energy(&arc.start, &p).total;
            let e1 = energy(&arc.end, &p).total;
            assert!((e1 - e0).abs() <= 1e-12 * e0.abs().max(1.0));
            assert_eq!(arc.end.vx, s.vx);
            assert_eq!(arc.end.omega, s.omega);
            assert!(guard_value(&arc.end, &surf, &p).abs() < 1e-9);
            assert!(guard_rate(&arc.end, &surf, &p) > 0.0);
            for k in 1..=32 {
                let tau = t * k as f64 / 33.0;
                assert!(guard_value(&arc.sample(tau, &p), &surf, &p) < 1e-9);
            }
        }
    }

    #[test]
    fn skips_roots_before_t_min() {
        let p = BallParams::default();
        // resting exactly on the guard while moving up
        let s = BallState {
            y: 0.1,
            vy: 1.0,
            ..BallState::default()
        };
        let t = time_to_impact(&s, &Surface::flat(), &p, 1e-9).unwrap();
        assert!((t - 2.0 / 9.81).abs() < 1e-12);
        assert_eq!(time_to_impact(&s, &Surface::flat(), &p, 1.0), None);
    }
}

//! Property tests of the impact laws and flight map on random contacts.

use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;

use impact_lab::flight::{propagate, time_to_impact};
use impact_lab::impact::{impact_equation_solve, impact_residuals, rolling_reset, slippery_reset, ImpactLaw};
use impact_lab::model::{energy, guard_rate, guard_value, BallParams, BallState, Surface, TableConfig};
use impact_lab::oracle::time_to_impact_oracle;
use impact_lab::symmetry::momentum_map;

fn disk() -> impl Strategy<Value = BallParams> {
    (0.02..0.3f64, 0.5..2.0f64).prop_map(|(r, m)| BallParams::new(m, 0.5 * m * r * r, r, 9.81).unwrap())
}

fn surface() -> impl Strategy<Value = Surface> {
    prop_oneof![
        (-1.3..1.3f64, -0.5..0.5f64).prop_map(|(u, v)| Surface::Plane(TableConfig::stationary(u, v))),
        (0.1..2.0f64).prop_map(Surface::Parabola),
    ]
}

/// Ball centre on the guard of `surf`, moving into it.
fn contact() -> impl Strategy<Value = (BallState, Surface, BallParams)> {
    (
        disk(),
        surface(),
        -1.5..1.5f64,
        -3.0..3.0f64,
        (-8.0..8.0f64, -8.0..8.0f64, -20.0..20.0f64),
    )
        .prop_map(|(p, surf, x, theta, (vx, vy, omega))| {
            let y = match surf {
                Surface::Plane(t) => (x * t.u.sin() + p.radius + t.v) / t.u.cos(),
                Surface::Parabola(a) => a * x * x + p.radius,
            };
            let s = BallState {
                x,
                y,
                theta,
                vx,
                vy,
                omega,
                t: 0.0,
            };
            (s, surf, p)
        })
        .prop_filter("moving into the surface", |(s, surf, p)| {
            guard_value(s, surf, p).abs() < 1e-9 && guard_rate(s, surf, p) > 1e-3
        })
}

fn scale(s: &BallState) -> f64 {
    1.0 + s.vx.abs() + s.vy.abs() + s.omega.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rolling_reset_satisfies_impact_equations((s, surf, p) in contact()) {
        let out = rolling_reset(&s, &surf, &p).unwrap();
        let r = impact_residuals(&s, &out, &surf, &p, ImpactLaw::Rolling);
        for v in r {
            prop_assert!(v.abs() <= 1e-9 * scale(&s) * scale(&s), "{r:?}");
        }
        prop_assert!(guard_rate(&out.post, &surf, &p) <= 0.0);
    }

    #[test]
    fn resets_on_stationary_surfaces_conserve_energy((s, surf, p) in contact()) {
        let e0 = energy(&s, &p).total;
        for out in [rolling_reset(&s, &surf, &p).unwrap(), slippery_reset(&s, &surf, &p).unwrap()] {
            let e1 = energy(&out.post, &p).total;
            prop_assert!((e1 - e0).abs() <= 1e-12 * e0.abs().max(1.0) * 100.0);
        }
    }

    #[test]
    fn rolling_reset_keeps_contact_momentum((s, surf, p) in contact()) {
        let out = rolling_reset(&s, &surf, &p).unwrap();
        let phi = impact_lab::model::local_contact_frame(&s, &surf);
        let contact = |b: &BallState| {
            p.inertia * b.omega - p.radius * p.mass * (b.vx * phi.cos() + b.vy * phi.sin())
        };
        prop_assert!((contact(&out.post) - contact(&s)).abs() <= 1e-11 * scale(&s));
    }

    #[test]
    fn momentum_map_jumps_by_lambda_r((s, surf, p) in contact()) {
        let rolled = rolling_reset(&s, &surf, &p).unwrap();
        let dj = momentum_map(&rolled.post, &p) - momentum_map(&s, &p);
        prop_assert!((dj - rolled.lambda * p.radius).abs() <= 1e-11 * scale(&s));
        let slid = slippery_reset(&s, &surf, &p).unwrap();
        prop_assert_eq!(momentum_map(&slid.post, &p), momentum_map(&s, &p));
    }

    #[test]
    fn closed_form_matches_generic_solve((s, surf, p) in contact()) {
        let closed = rolling_reset(&s, &surf, &p).unwrap();
        let generic = impact_equation_solve(&s, &surf, &p).unwrap();
        let tol = 1e-9 * scale(&s);
        prop_assert!((closed.post.vx - generic.post.vx).abs() <= tol);
        prop_assert!((closed.post.vy - generic.post.vy).abs() <= tol);
        prop_assert!((closed.post.omega - generic.post.omega).abs() <= tol);
    }

    #[test]
    fn flight_agrees_with_bisection_oracle(
        p in disk(),
        surf in surface(),
        x in -1.0..1.0f64,
        lift in 0.01..1.5f64,
        vx in -3.0..3.0f64,
        vy in -3.0..3.0f64,
    ) {
        let y = match surf {
            Surface::Plane(t) => (x * t.u.sin() + p.radius + t.v) / t.u.cos() + lift,
            Surface::Parabola(a) => a * x * x + p.radius + lift,
        };
        let s = BallState { x, y, theta: 0.0, vx, vy, omega: 1.0, t: 0.0 };
        prop_assume!(guard_value(&s, &surf, &p) < 0.0);
        let fast = time_to_impact(&s, &surf, &p, 0.0);
        let slow = time_to_impact_oracle(&s, &surf, &p, 0.0);
        match (fast, slow) {
            (Some(a), Some(b)) => {
                prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
                prop_assert!(guard_value(&propagate(&s, a, &p), &surf, &p).abs() <= 1e-9);
            }
            (None, None) => {}
            other => prop_assert!(false, "existence mismatch {other:?}"),
        }
    }

    #[test]
    fn steep_planes_still_reset(u in -FRAC_PI_2 + 0.05..FRAC_PI_2 - 0.05, vy in -9.0..-0.5f64) {
        let p = BallParams::default();
        let surf = Surface::Plane(TableConfig::stationary(u, 0.0));
        let s = BallState { x: 0.0, y: p.radius / u.cos(), theta: 0.0, vx: 0.0, vy, omega: 0.0, t: 0.0 };
        prop_assume!(guard_rate(&s, &surf, &p) > 1e-3);
        let out = rolling_reset(&s, &surf, &p).unwrap();
        prop_assert!(guard_rate(&out.post, &surf, &p) <= 0.0);
    }
}

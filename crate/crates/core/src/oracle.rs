//! Slow reference implementations used to cross-check the closed forms.
//! Nothing on a production path calls into this module.

use crate::flight::propagate;
use crate::model::{guard_value, BallParams, BallState, Surface};

pub const ORACLE_STEP: f64 = 1e-4;
pub const ORACLE_HORIZON: f64 = 100.0;

/// Same contract as [`crate::flight::time_to_impact`], found by scanning the
/// guard on a uniform time grid for an upward sign change and bisecting it.
pub fn time_to_impact_oracle(
    s: &BallState,
    surf: &Surface,
    p: &BallParams,
    t_min: f64,
) -> Option<f64> {
    let h = |t: f64| guard_value(&propagate(s, t, p), surf, p);
    let steps = ((ORACLE_HORIZON - t_min) / ORACLE_STEP).ceil() as u64;
    let mut lo = t_min;
    let mut h_lo = h(lo);
    for k in 1..=steps {
        let hi = t_min + k as f64 * ORACLE_STEP;
        let h_hi = h(hi);
        if h_lo <= 0.0 && h_hi > 0.0 {
            return Some(bisect(&h, lo, hi));
        }
        lo = hi;
        h_lo = h_hi;
    }
    None
}

fn bisect(h: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

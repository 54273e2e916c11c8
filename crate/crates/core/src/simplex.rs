//! Box-constrained Nelder-Mead.

/// Reflection, expansion, contraction and shrink coefficients.
const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    pub max_iters: usize,
    /// Stop once every vertex is within this distance (max norm) of the best.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

struct Boxed<'a, F> {
    f: F,
    lower: &'a [f64],
    upper: &'a [f64],
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Boxed<'_, F> {
    fn clamp(&self, x: &mut [f64]) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = xi.clamp(self.lower[i], self.upper[i]);
        }
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Minimises `f` over the box `[lower, upper]` starting from `x0`. The
/// initial simplex steps `scale[i]` along each axis (backwards if the step
/// would leave the box). Points are clamped into the box after every move.
/// The returned value never exceeds `f(x0)`.
pub fn minimize<F>(
    f: F,
    x0: &[f64],
    scale: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(scale.len() == n && lower.len() == n && upper.len() == n);
    let mut obj = Boxed {
        f,
        lower,
        upper,
        evaluations: 0,
    };
    let mut start = x0.to_vec();
    obj.clamp(&mut start);
    let f0 = obj.eval(&start);
    if n == 0 || opts.max_iters == 0 || f0 == 0.0 {
        return SimplexResult {
            x: start,
            value: f0,
            iterations: 0,
            evaluations: obj.evaluations,
        };
    }

    let mut verts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    verts.push((start.clone(), f0));
    for i in 0..n {
        let mut v = start.clone();
        v[i] += scale[i];
        if v[i] > upper[i] {
            v[i] = start[i] - scale[i];
        }
        obj.clamp(&mut v);
        let fv = obj.eval(&v);
        verts.push((v, fv));
    }

    let mut iterations = 0;
    while iterations < opts.max_iters {
        // stable sort keeps earlier vertices first on ties
        verts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = verts[0].0.clone();
        let diameter = verts[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < opts.tolerance || verts[0].1 == 0.0 {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (v, _) in &verts[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = verts[n].0.clone();
        let f_worst = verts[n].1;
        let f_second = verts[n - 1].1;
        let f_best = verts[0].1;
        let toward = |coef: f64, target: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(target)
                .map(|(c, t)| c + coef * (t - c))
                .collect()
        };

        let mut reflected = toward(-REFLECT, &worst);
        obj.clamp(&mut reflected);
        let f_reflected = obj.eval(&reflected);

        if f_reflected < f_best {
            let mut expanded = toward(-EXPAND, &worst);
            obj.clamp(&mut expanded);
            let f_expanded = obj.eval(&expanded);
            verts[n] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < f_second {
            verts[n] = (reflected, f_reflected);
            continue;
        }
        let accepted = if f_reflected < f_worst {
            let mut outside = toward(CONTRACT, &reflected);
            obj.clamp(&mut outside);
            let f_outside = obj.eval(&outside);
            (f_outside <= f_reflected).then_some((outside, f_outside))
        } else {
            let mut inside = toward(CONTRACT, &worst);
            obj.clamp(&mut inside);
            let f_inside = obj.eval(&inside);
            (f_inside < f_worst).then_some((inside, f_inside))
        };
        match accepted {
            Some(vertex) => verts[n] = vertex,
            None => {
                for (v, fv) in verts.iter_mut().skip(1) {
                    for (x, b) in v.iter_mut().zip(&best) {
                        *x = b + SHRINK * (*x - b);
                    }
                    *fv = obj.eval(v);
                }
            }
        }
    }

    verts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = verts.swap_remove(0);
    SimplexResult {
        x,
        value,
        iterations,
        evaluations: obj.evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(max_iters: usize) -> SimplexOptions {
        SimplexOptions {
            max_iters,
            tolerance: 1e-10,
        }
    }

    #[test]
    fn finds_rosenbrock_minimum() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(
            rosen,
            &[-1.2, 1.0],
            &[0.1, 0.1],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            &opts(2000),
        );
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn respects_the_box() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 2.0).powi(2);
        let r = minimize(f, &[0.5, 0.5], &[0.1, 0.1], &[0.0, 0.0], &[1.0, 1.0], &opts(500));
        assert!((r.x[0] - 1.0).abs() < 1e-6);
        assert!(r.x[1].abs() < 1e-6);
    }

    #[test]
    fn zero_at_start_returns_start() {
        let mut calls = 0;
        let r = minimize(
            |_x: &[f64]| {
                calls += 1;
                0.0
            },
            &[0.3, 0.4],
            &[0.1, 0.1],
            &[0.0, 0.0],
            &[1.0, 1.0],
            &opts(100),
        );
        assert_eq!(r.x, vec![0.3, 0.4]);
        assert_eq!(r.evaluations, 1);
        assert_eq!(calls, 1);
    }

    #[test]
    fn never_worse_than_start_and_deterministic() {
        let bumpy = |x: &[f64]| (5.0 * x[0]).sin() * (3.0 * x[1]).cos() + x[0] * x[1];
        let run = || minimize(bumpy, &[0.2, 0.9], &[0.1, 0.3], &[0.0, 0.0], &[1.0, 3.0], &opts(50));
        let a = run();
        assert!(a.value <= bumpy(&[0.2, 0.9]));
        assert_eq!(a, run());
    }

    #[test]
    fn zero_budget_is_pure_evaluation() {
        let r = minimize(|x: &[f64]| x[0], &[0.5], &[0.1], &[0.0], &[1.0], &opts(0));
        assert_eq!((r.x[0], r.value, r.iterations), (0.5, 0.5, 0));
    }
}

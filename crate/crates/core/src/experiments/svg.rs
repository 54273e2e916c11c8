//! Hand-written SVG renderers. Output depends only on the input values, so
//! identical inputs give identical bytes.

use std::fmt::Write as _;

use crate::executor::HybridTrajectory;
use crate::experiments::sweep::SweepCell;
use crate::model::{BallParams, Surface};

/// Marker colors for bounce counts -1 through 5.
pub const BOUNCE_COLORS: [&str; 7] = [
    "#000000", "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02",
];

pub fn bounce_color(bounces: i32) -> &'static str {
    let idx = (bounces + 1).clamp(0, 6) as usize;
    BOUNCE_COLORS[idx]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarVariant {
    /// Solved cells, colored by bounce count.
    Controllability,
    /// Unsolved cells only.
    Failure,
}

const SIZE: f64 = 640.0;
const PLOT_RADIUS: f64 = 260.0;
const CENTER: f64 = 300.0;

fn num(v: f64) -> String {
    // fixed precision keeps the files small and stable
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Polar position of a cell: angle `theta_f`, radius proportional to `T`.
pub fn polar_position(theta_f: f64, duration: f64, t_max: f64) -> (f64, f64) {
    let r = if t_max > 0.0 { PLOT_RADIUS * duration / t_max } else { 0.0 };
    (CENTER + r * theta_f.cos(), CENTER - r * theta_f.sin())
}

/// Polar scatter of sweep cells. Each shown cell is one `circle` carrying
/// its row-major index in `data-cell`.
pub fn render_polar_svg(cells: &[SweepCell], variant: PolarVariant) -> String {
    let t_max = cells.iter().map(|c| c.duration).fold(0.0, f64::max);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = SIZE as u32 + 140,
        h = SIZE as u32
    );
    let title = match variant {
        PolarVariant::Controllability => "bounces needed per target (angle: theta_f, radius: T)",
        PolarVariant::Failure => "targets without a solution (angle: theta_f, radius: T)",
    };
    let _ = writeln!(svg, r#"<title>{title}</title>"#);
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    for frac in [0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            svg,
            r##"<circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="#cccccc"/>"##,
            c = num(CENTER),
            r = num(PLOT_RADIUS * frac)
        );
        let label = if t_max > 0.0 { num(t_max * frac) } else { num(0.0) };
        let _ = writeln!(
            svg,
            r##"<text x="{x}" y="{y}" font-size="10" fill="#666666">T={label}</text>"##,
            x = num(CENTER + 2.0),
            y = num(CENTER - PLOT_RADIUS * frac - 2.0)
        );
    }
    let _ = writeln!(svg, r#"<g id="markers">"#);
    for (index, cell) in cells.iter().enumerate() {
        let show = match variant {
            PolarVariant::Controllability => cell.is_solved(),
            PolarVariant::Failure => !cell.is_solved(),
        };
        if !show {
            continue;
        }
        let (x, y) = polar_position(cell.theta_f, cell.duration, t_max);
        let _ = writeln!(
            svg,
            r#"<circle data-cell="{index}" cx="{}" cy="{}" r="3" fill="{}"/>"#,
            num(x),
            num(y),
            bounce_color(cell.bounces)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g id="legend">"#);
    let first = match variant {
        PolarVariant::Controllability => 0,
        PolarVariant::Failure => -1,
    };
    let last = match variant {
        PolarVariant::Controllability => 5,
        PolarVariant::Failure => -1,
    };
    for (row, b) in (first..=last).enumerate() {
        let y = 30.0 + 20.0 * row as f64;
        let label = if b < 0 { "unsolved".to_string() } else { format!("{b} bounces") };
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}" font-size="12">{label}</text>"#,
            num(SIZE),
            num(y),
            bounce_color(b),
            num(SIZE + 18.0),
            num(y + 11.0)
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}

/// Diverging blue-white-red map of `value` clipped to `[-limit, limit]`.
pub fn diverging_color(value: f64, limit: f64) -> String {
    let s = if limit > 0.0 { (value / limit).clamp(-1.0, 1.0) } else { 0.0 };
    let lerp = |a: f64, b: f64, t: f64| (a + (b - a) * t).round() as u8;
    let (r, g, b) = if s < 0.0 {
        let t = -s;
        (lerp(255.0, 33.0, t), lerp(255.0, 102.0, t), lerp(255.0, 172.0, t))
    } else {
        (lerp(255.0, 178.0, s), lerp(255.0, 24.0, s), lerp(255.0, 43.0, s))
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Trajectory of the disk center colored by angular velocity, drawn over
/// the surface it bounces on.
pub fn render_trajectory_svg(
    traj: &HybridTrajectory,
    surface: &Surface,
    p: &BallParams,
    samples_per_arc: usize,
) -> String {
    let samples: Vec<_> = traj.samples(p, samples_per_arc).into_iter().map(|(s, _)| s).collect();
    let limit = samples.iter().map(|s| s.omega.abs()).fold(0.0, f64::max);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for s in &samples {
        x0 = x0.min(s.x);
        x1 = x1.max(s.x);
        y0 = y0.min(s.y);
        y1 = y1.max(s.y);
    }
    if samples.is_empty() {
        (x0, x1, y0, y1) = (-1.0, 1.0, 0.0, 1.0);
    }
    let pad = 0.1 * (x1 - x0).max(y1 - y0).max(0.2);
    let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
    let scale = (SIZE - 40.0) / (x1 - x0).max(y1 - y0);
    let px = |x: f64| 20.0 + (x - x0) * scale;
    let py = |y: f64| SIZE - 20.0 - (y - y0) * scale;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = SIZE as u32 + 120,
        h = SIZE as u32
    );
    let _ = writeln!(svg, "<title>disk center colored by angular velocity (rad/s)</title>");
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);

    // surface curve, offset by the radius like the guard
    let mut curve = Vec::new();
    for k in 0..=200 {
        let x = x0 + (x1 - x0) * k as f64 / 200.0;
        let y = match surface {
            Surface::Parabola(alpha) => alpha * x * x,
            Surface::Plane(t) => {
                if t.u.cos().abs() < 1e-12 {
                    continue;
                }
                (x * t.u.sin() + t.v) / t.u.cos()
            }
        };
        if y >= y0 && y <= y1 {
            curve.push(format!("{},{}", num(px(x)), num(py(y))));
        }
    }
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#888888" stroke-width="2"/>"##,
        curve.join(" ")
    );
    let _ = writeln!(svg, r#"<g id="path" stroke-width="1.5">"#);
    for pair in samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}"/>"#,
            num(px(a.x)),
            num(py(a.y)),
            num(px(b.x)),
            num(py(b.y)),
            diverging_color(0.5 * (a.omega + b.omega), limit)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g id="colorbar">"#);
    for k in 0..=20 {
        let v = limit * (1.0 - k as f64 / 10.0);
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="16" height="12" fill="{}"/>"#,
            num(SIZE + 10.0),
            num(40.0 + 12.0 * k as f64),
            diverging_color(v, limit)
        );
    }
    for (k, v) in [(0, limit), (10, 0.0), (20, -limit)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11">{}</text>"#,
            num(SIZE + 30.0),
            num(50.0 + 12.0 * k as f64),
            num(v)
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}

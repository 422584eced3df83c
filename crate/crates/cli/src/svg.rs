//! Minimal deterministic SVG line plots.
//!
//! Data paths carry the exact `%.17g` strings written to the CSV files and
//! are mapped to the canvas by a single `transform` on their group.

use std::fmt::Write;

use crate::output::fmt_g17;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;

const LEFT: f64 = 90.0;
const RIGHT: f64 = 770.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 530.0;
const TARGET_TICKS: f64 = 6.0;
const PALETTE: [&str; 4] = ["#1f5fa8", "#c0392b", "#2e8b57", "#7d3c98"];

/// One polyline.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Tick positions on the 1-2-5 ladder covering `[lo, hi]`, plus the step.
pub fn nice_ticks(lo: f64, hi: f64) -> (Vec<f64>, f64) {
    let (lo, hi) = padded(lo, hi);
    let raw = (hi - lo) / TARGET_TICKS;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw * (1.0 - 1e-12))
        .unwrap_or(10.0 * mag);
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), step)
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        "0".into()
    } else {
        s
    }
}

impl LinePlot {
    pub fn render(&self) -> String {
        let finite = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in finite {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let (xt, xstep) = nice_ticks(x0, x1);
        let (yt, ystep) = nice_ticks(y0, y1);
        let (x0, x1) = (xt[0], *xt.last().unwrap());
        let (y0, y1) = (yt[0], *yt.last().unwrap());
        let sx = (RIGHT - LEFT) / (x1 - x0);
        let sy = -(BOTTOM - TOP) / (y1 - y0);
        let px = |x: f64| LEFT + sx * (x - x0);
        let py = |y: f64| BOTTOM + sy * (y - y0);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">"#
        );
        let _ = writeln!(
            s,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
            (LEFT + RIGHT) / 2.0,
            escape(&self.title)
        );

        let _ = writeln!(s, r##"<g class="grid" stroke="#dddddd" stroke-width="1">"##);
        for &t in &xt {
            let _ = writeln!(
                s,
                r#"<line x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{BOTTOM}"/>"#,
                px(t)
            );
        }
        for &t in &yt {
            let _ = writeln!(
                s,
                r#"<line x1="{LEFT}" y1="{0:.2}" x2="{RIGHT}" y2="{0:.2}"/>"#,
                py(t)
            );
        }
        let _ = writeln!(s, "</g>");

        let _ = writeln!(
            s,
            r#"<g class="axes" stroke="black" stroke-width="1.2" fill="none">"#
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}"/>"#,
            RIGHT - LEFT,
            BOTTOM - TOP
        );
        let _ = writeln!(s, "</g>");

        let _ = writeln!(s, r#"<g class="ticks">"#);
        for &t in &xt {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
                px(t),
                BOTTOM + 20.0,
                tick_label(t, xstep)
            );
        }
        for &t in &yt {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
                LEFT - 8.0,
                py(t),
                tick_label(t, ystep)
            );
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (LEFT + RIGHT) / 2.0,
            BOTTOM + 48.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="24" y="{0}" text-anchor="middle" transform="rotate(-90 24 {0})">{1}</text>"#,
            (TOP + BOTTOM) / 2.0,
            escape(&self.y_label)
        );

        let _ = writeln!(
            s,
            r#"<g class="data" transform="matrix({} 0 0 {} {} {})">"#,
            fmt_g17(sx),
            fmt_g17(sy),
            fmt_g17(LEFT - sx * x0),
            fmt_g17(BOTTOM - sy * y0)
        );
        for (i, series) in self.series.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<path data-label="{}" fill="none" stroke="{}" stroke-width="2" vector-effect="non-scaling-stroke" d="{}"/>"#,
                escape(&series.label),
                PALETTE[i % PALETTE.len()],
                path_data(&series.points)
            );
        }
        let _ = writeln!(s, "</g>");

        let _ = writeln!(s, r#"<g class="legend">"#);
        for (i, series) in self.series.iter().enumerate() {
            let y = TOP + 18.0 + 18.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{y}" dominant-baseline="middle">{}</text>"#,
                RIGHT - 150.0,
                RIGHT - 125.0,
                PALETTE[i % PALETTE.len()],
                RIGHT - 118.0,
                escape(&series.label)
            );
        }
        let _ = writeln!(s, "</g>");
        s.push_str("</svg>\n");
        s
    }
}

/// `M x y L x y ...`; non-finite points break the line.
fn path_data(points: &[(f64, f64)]) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for &(x, y) in points {
        if !(x.is_finite() && y.is_finite()) {
            pen_down = false;
            continue;
        }
        if !d.is_empty() {
            d.push(' ');
        }
        d.push(if pen_down { 'L' } else { 'M' });
        let _ = write!(d, " {} {}", fmt_g17(x), fmt_g17(y));
        pen_down = true;
    }
    d
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

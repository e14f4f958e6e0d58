//! Deterministic SVG 1.1 line and scatter charts.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Scatter,
    LineScatter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub style: Style,
}

impl Series {
    pub fn new(label: &str, x: Vec<f64>, y: Vec<f64>, style: Style) -> Self {
        Series { label: label.into(), x, y, style }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Fixed ranges; derived from the data when absent.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub log_y: bool,
}

impl Axes {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Axes { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Axes::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlotError {
    Empty,
    Length { label: String, x: usize, y: usize },
    Range(String),
}

impl std::fmt::Display for PlotError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlotError::Empty => write!(f, "plot needs at least one series"),
            PlotError::Length { label, x, y } => write!(f, "series '{label}' has {x} x values and {y} y values"),
            PlotError::Range(m) => write!(f, "plot range: {m}"),
        }
    }
}

impl std::error::Error for PlotError {}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Step from the 1-2-5 sequence giving roughly `target` intervals.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn linear_ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let step = nice_step(hi - lo, 6.0);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn fmt_tick(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Data range padded when degenerate so a constant series draws as a
/// centered horizontal line.
fn span_of(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

/// Renders the series into one chart. Non-finite points are skipped and
/// break the line at that point.
pub fn emit_plot(series: &[Series], axes: &Axes) -> Result<Vec<u8>, PlotError> {
    if series.is_empty() {
        return Err(PlotError::Empty);
    }
    for s in series {
        if s.x.len() != s.y.len() {
            return Err(PlotError::Length { label: s.label.clone(), x: s.x.len(), y: s.y.len() });
        }
    }
    let ty = |y: f64| if axes.log_y { if y > 0.0 { y.log10() } else { f64::NAN } } else { y };
    let finite_pts = || {
        series.iter().flat_map(|s| s.x.iter().zip(&s.y)).filter(|(x, y)| x.is_finite() && ty(**y).is_finite())
    };
    let (x0, x1) = match axes.x_range {
        Some(r) => r,
        None => span_of(finite_pts().map(|(x, _)| *x)).unwrap_or((0.0, 1.0)),
    };
    let (y0, y1) = match axes.y_range {
        Some((a, b)) => (ty(a), ty(b)),
        None => span_of(finite_pts().map(|(_, y)| ty(*y))).unwrap_or((0.0, 1.0)),
    };
    if !(x1 > x0) || !(y1 > y0) || !x0.is_finite() || !y0.is_finite() {
        return Err(PlotError::Range(format!("x [{x0}, {x1}], y [{y0}, {y1}]")));
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, num(WIDTH / 2.0), escape(&axes.title));
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        num(LEFT),
        num(TOP),
        num(pw),
        num(ph)
    );

    let (xt, xd) = linear_ticks(x0, x1);
    for t in xt {
        let x = px(t);
        let _ = writeln!(out, r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>"#, num(x), num(TOP + ph), num(TOP + ph + 5.0));
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, num(x), num(TOP + ph + 18.0), fmt_tick(t, xd));
    }
    let y_ticks: Vec<(f64, String)> = if axes.log_y {
        let (a, b) = (y0.ceil() as i64, y1.floor() as i64);
        (a..=b).map(|k| (k as f64, format!("1e{k}"))).collect()
    } else {
        let (yt, yd) = linear_ticks(y0, y1);
        yt.into_iter().map(|t| (t, fmt_tick(t, yd))).collect()
    };
    for (t, label) in y_ticks {
        let y = py(t);
        let _ = writeln!(out, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>"#, num(LEFT - 5.0), num(y), num(LEFT));
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, num(LEFT - 8.0), num(y + 4.0), label);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, num(LEFT + pw / 2.0), num(HEIGHT - 14.0), escape(&axes.x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        num(TOP + ph / 2.0),
        escape(&axes.y_label)
    );

    let _ = writeln!(out, r#"<g>"#);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<Option<(f64, f64)>> = s
            .x
            .iter()
            .zip(&s.y)
            .map(|(&x, &y)| {
                let y = ty(y);
                (x.is_finite() && y.is_finite()).then(|| (px(x), py(y)))
            })
            .collect();
        if matches!(s.style, Style::Line | Style::LineScatter) {
            for run in pts.split(|p| p.is_none()).filter(|r| !r.is_empty()) {
                let coords: Vec<String> = run.iter().flatten().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
                let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
            }
        }
        if matches!(s.style, Style::Scatter | Style::LineScatter) {
            for (x, y) in pts.iter().flatten() {
                let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#, num(*x), num(*y));
            }
        }
        let ly = TOP + 16.0 + 16.0 * k as f64;
        let lx = LEFT + pw - 150.0;
        let _ = writeln!(out, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{color}" stroke-width="2"/>"#, num(lx), num(ly - 4.0), num(lx + 20.0));
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, num(lx + 26.0), num(ly), escape(&s.label));
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out.into_bytes())
}

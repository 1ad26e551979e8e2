//! Deterministic SVG output for embeddings and simple line charts.
//!
//! All numbers go through [`fmt_sig`] so identical inputs give identical
//! bytes on every platform.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::layout::Embedding2D;

/// Decimal rendering with 6 significant digits, no exponent, trailing zeros
/// trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".to_string() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    // Rounding can carry into a new digit (9.999995 -> 10.00000).
    if s.contains('.') {
        let digits = s.trim_start_matches('-').replace('.', "").trim_start_matches('0').len();
        if digits > 6 && decimals > 0 {
            s = format!("{x:.prec$}", prec = decimals - 1);
        }
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

const PALETTE: [&str; 20] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
    "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    pub canvas_px: u32,
    pub point_radius_px: f64,
    pub palette: Vec<String>,
    /// Blank border as a fraction of the unit square, in `[0, 0.5)`.
    pub margin_fraction: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            canvas_px: 1000,
            point_radius_px: 3.0,
            palette: PALETTE.iter().map(|s| s.to_string()).collect(),
            margin_fraction: 0.08,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.canvas_px == 0 {
            return bad("canvas must be at least 1px".into());
        }
        if !(self.point_radius_px > 0.0) {
            return bad(format!("point radius must be positive, got {}", self.point_radius_px));
        }
        if !(0.0..0.5).contains(&self.margin_fraction) {
            return bad(format!("margin must lie in [0, 0.5), got {}", self.margin_fraction));
        }
        if self.palette.is_empty() {
            return bad("palette must not be empty".into());
        }
        for c in &self.palette {
            let ok = c.len() == 7 && c.starts_with('#') && c[1..].chars().all(|ch| ch.is_ascii_hexdigit());
            if !ok {
                return bad(format!("invalid palette color `{c}`"));
            }
        }
        Ok(())
    }

    pub fn color(&self, class: usize) -> &str {
        &self.palette[class % self.palette.len()]
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn header(out: &mut String, w: u32, h: u32) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##);
}

/// Maps `[-1 - margin, 1 + margin]²` onto the canvas, y pointing up.
struct Viewport {
    scale: f64,
    half: f64,
}

impl Viewport {
    fn new(style: &RenderStyle) -> Self {
        let size = f64::from(style.canvas_px);
        let extent = 1.0 + 2.0 * style.margin_fraction;
        Viewport {
            scale: size / (2.0 * extent),
            half: size / 2.0,
        }
    }

    fn map(&self, [x, y]: [f64; 2]) -> (f64, f64) {
        (self.half + x * self.scale, self.half - y * self.scale)
    }
}

/// Polygon outline, one circle per sample colored by class, and a legend.
pub fn render_embedding(emb: &Embedding2D, style: &RenderStyle) -> Vec<u8> {
    let vp = Viewport::new(style);
    let mut out = String::new();
    header(&mut out, style.canvas_px, style.canvas_px);

    let mut d = String::new();
    for c in 0..emb.polygon.num_vertices() {
        let (x, y) = vp.map(emb.polygon.vertex(c));
        let _ = write!(d, "{}{} {} ", if c == 0 { "M" } else { "L" }, fmt_sig(x), fmt_sig(y));
    }
    d.push('Z');
    let _ = writeln!(out, r##"<path d="{d}" fill="none" stroke="#333333" stroke-width="1.5"/>"##);

    let r = fmt_sig(style.point_radius_px);
    for i in 0..emb.points.nrows() {
        let (x, y) = vp.map(emb.point(i));
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="{r}" fill="{}" fill-opacity="0.8"/>"#,
            fmt_sig(x),
            fmt_sig(y),
            style.color(emb.labels[i])
        );
    }

    let size = f64::from(style.canvas_px);
    let font = (size * 0.018).max(8.0);
    let swatch = font * 0.8;
    for (c, name) in emb.class_names.iter().enumerate() {
        let y = size * 0.02 + c as f64 * font * 1.4;
        let x = size * 0.02;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{s}" height="{s}" fill="{}"/>"#,
            fmt_sig(x),
            fmt_sig(y),
            style.color(c),
            s = fmt_sig(swatch)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="{}">{}</text>"#,
            fmt_sig(x + swatch * 1.5),
            fmt_sig(y + swatch),
            fmt_sig(font),
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out.into_bytes()
}

fn decade_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let mut ticks = Vec::new();
    let mut e = lo.log10().floor() as i32;
    while 10f64.powi(e) <= hi * (1.0 + 1e-12) {
        let t = 10f64.powi(e);
        if t >= lo * (1.0 - 1e-12) {
            ticks.push(t);
        }
        e += 1;
    }
    if ticks.len() < 2 {
        ticks = vec![lo, hi];
    }
    ticks
}

/// Line chart with a log-scaled x axis and a linear y axis. `x` values must
/// be positive and strictly increasing.
pub fn render_curve(series: &[(f64, f64)], title: &str, style: &RenderStyle) -> Result<Vec<u8>> {
    if series.len() < 2 {
        return Err(Error::TooFewPoints(series.len()));
    }
    for (i, w) in series.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(Error::NonMonotonicX(i + 1));
        }
    }
    if !(series[0].0 > 0.0) {
        return Err(Error::InvalidConfig("log-scaled x axis needs positive x values".into()));
    }

    let width = f64::from(style.canvas_px);
    let height = width * 0.6;
    let (left, right, top, bottom) = (width * 0.1, width * 0.96, height * 0.1, height * 0.85);
    let (x_lo, x_hi) = (series[0].0, series[series.len() - 1].0);
    let y_hi = series.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let y_lo = series.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).min(0.0);
    let y_span = if y_hi > y_lo { y_hi - y_lo } else { 1.0 };
    let (lx_lo, lx_hi) = (x_lo.log10(), x_hi.log10());
    let px = |x: f64| left + (x.log10() - lx_lo) / (lx_hi - lx_lo) * (right - left);
    let py = |y: f64| bottom - (y - y_lo) / y_span * (bottom - top);

    let mut out = String::new();
    header(&mut out, style.canvas_px, height.round() as u32);
    let font = fmt_sig((width * 0.016).max(8.0));

    let _ = writeln!(
        out,
        r##"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="#000000" stroke-width="1"/>"##,
        l = fmt_sig(left),
        t = fmt_sig(top),
        b = fmt_sig(bottom),
        r = fmt_sig(right)
    );
    for t in decade_ticks(x_lo, x_hi) {
        let x = fmt_sig(px(t));
        let _ = writeln!(
            out,
            r##"<path d="M{x} {b} L{x} {b2}" stroke="#000000" stroke-width="1"/>"##,
            b = fmt_sig(bottom),
            b2 = fmt_sig(bottom + 6.0)
        );
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="{font}" text-anchor="middle">{}</text>"#,
            fmt_sig(bottom + 22.0),
            fmt_sig(t)
        );
    }
    for i in 0..=4 {
        let v = y_lo + y_span * f64::from(i) / 4.0;
        let y = fmt_sig(py(v));
        let _ = writeln!(
            out,
            r##"<path d="M{l2} {y} L{l} {y}" stroke="#000000" stroke-width="1"/>"##,
            l = fmt_sig(left),
            l2 = fmt_sig(left - 6.0)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="{font}" text-anchor="end">{}</text>"#,
            fmt_sig(left - 10.0),
            fmt_sig(v)
        );
    }

    let pts: Vec<String> = series
        .iter()
        .map(|&(x, y)| format!("{},{}", fmt_sig(px(x)), fmt_sig(py(y))))
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        pts.join(" ")
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="{font}" text-anchor="middle">{}</text>"#,
        fmt_sig(width / 2.0),
        fmt_sig(top / 2.0),
        escape(title)
    );
    out.push_str("</svg>\n");
    Ok(out.into_bytes())
}

//! Minimal hand-written SVG. Coordinates are printed with two decimals.

use std::fmt::Write;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub fn num(v: f64) -> String {
    fixed(v, 2)
}

fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub struct Svg {
    body: String,
}

impl Default for Svg {
    fn default() -> Self {
        Self::new()
    }
}

impl Svg {
    pub fn new() -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
            w = WIDTH,
            h = HEIGHT
        );
        let _ = writeln!(
            body,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        Self { body }
    }

    fn points(pts: &[(f64, f64)]) -> String {
        pts.iter()
            .map(|&(x, y)| format!("{},{}", num(x), num(y)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, dash: Option<&str>) {
        let dash = dash
            .map(|d| format!(r#" stroke-dasharray="{d}""#))
            .unwrap_or_default();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}"{dash}/>"#,
            Self::points(pts),
            num(width)
        );
    }

    pub fn polygon(&mut self, pts: &[(f64, f64)], fill: &str, opacity: f64) {
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="{}" stroke="none"/>"#,
            Self::points(pts),
            num(opacity)
        );
    }

    pub fn line(&mut self, from: (f64, f64), to: (f64, f64), stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"/>"#,
            num(from.0),
            num(from.1),
            num(to.0),
            num(to.1),
            num(width)
        );
    }

    pub fn circle(&mut self, center: (f64, f64), r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            num(center.0),
            num(center.1),
            num(r)
        );
    }

    pub fn text(&mut self, at: (f64, f64), anchor: &str, size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" text-anchor="{anchor}" font-size="{}">{}</text>"#,
            num(at.0),
            num(at.1),
            num(size),
            escape(content)
        );
    }

    pub fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// Tick positions at 1, 2 or 5 × 10^k, roughly `target` of them, and the
/// number of decimals needed to print them.
pub fn ticks(lo: f64, hi: f64, target: usize) -> (Vec<f64>, usize) {
    let span = hi - lo;
    if span.is_nan() || span <= 0.0 {
        return (vec![lo], 2);
    }
    let raw = span / target.max(1) as f64;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

/// A rectangular plotting area mapping data coordinates to pixels.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl Frame {
    pub fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        (
            self.left + (x - x0) / (x1 - x0) * self.width,
            self.top + self.height - (y - y0) / (y1 - y0) * self.height,
        )
    }

    pub fn map_all(&self, pts: impl IntoIterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
        pts.into_iter().map(|p| self.map(p)).collect()
    }

    pub fn axes(&self, svg: &mut Svg, x_label: &str, y_label: &str, show_y_ticks: bool) {
        let bottom = self.top + self.height;
        let right = self.left + self.width;
        svg.line((self.left, bottom), (right, bottom), "black", 1.0);
        svg.line((self.left, self.top), (self.left, bottom), "black", 1.0);
        let (xt, xd) = ticks(self.x_range.0, self.x_range.1, 5);
        for x in xt {
            let (px, _) = self.map((x, self.y_range.0));
            svg.line((px, bottom), (px, bottom + 5.0), "black", 1.0);
            svg.text((px, bottom + 18.0), "middle", 11.0, &fixed(x, xd));
        }
        if show_y_ticks {
            let (yt, yd) = ticks(self.y_range.0, self.y_range.1, 5);
            for y in yt {
                let (_, py) = self.map((self.x_range.0, y));
                svg.line((self.left - 5.0, py), (self.left, py), "black", 1.0);
                svg.text((self.left - 8.0, py + 4.0), "end", 11.0, &fixed(y, yd));
            }
        }
        svg.text(
            (self.left + self.width / 2.0, bottom + 36.0),
            "middle",
            13.0,
            x_label,
        );
        if show_y_ticks {
            svg.text(
                (self.left - 44.0, self.top + self.height / 2.0),
                "middle",
                13.0,
                y_label,
            );
        }
    }
}

/// Pads `(lo, hi)` by 5% on both sides; widens a degenerate range.
pub fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    if span > 0.0 {
        (lo - 0.05 * span, hi + 0.05 * span)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

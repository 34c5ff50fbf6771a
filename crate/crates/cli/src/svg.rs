//! Minimal standalone SVG plots: scatter markers, polylines, log or linear
//! axes and a legend. Every data marker carries `class="marker"`.

use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Circle,
    Cross,
    Square,
    Triangle,
    Diamond,
    Plus,
}

impl Marker {
    pub const CYCLE: [Marker; 6] =
        [Self::Circle, Self::Cross, Self::Square, Self::Triangle, Self::Diamond, Self::Plus];
}

pub const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub marker: Option<Marker>,
    /// Draw a polyline through the points.
    pub connect: bool,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn scatter(label: impl Into<String>, idx: usize, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            color: PALETTE[idx % PALETTE.len()].into(),
            marker: Some(Marker::CYCLE[idx % Marker::CYCLE.len()]),
            connect: false,
            dashed: false,
            points,
        }
    }

    /// A dashed reference curve without markers.
    pub fn reference(label: impl Into<String>, color: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            color: color.into(),
            marker: None,
            connect: true,
            dashed: true,
            points,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const W: f64 = 720.0;
const H: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(log: bool, values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { log, lo, hi }
    }

    fn frac(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let t = if self.log { v.log10() } else { v };
        Some((t - self.lo) / (self.hi - self.lo))
    }

    /// Tick positions in data coordinates with labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 10.0).ceil().max(1.0) as i64;
            (self.lo as i64..=self.hi as i64)
                .filter(|e| (e - self.lo as i64) % step == 0)
                .map(|e| (10f64.powi(e as i32), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(raw);
            let mut t = (self.lo / step).ceil() * step;
            let mut out = Vec::new();
            while t <= self.hi + 1e-9 * step {
                out.push((t, format!("{}", (t / step).round() * step)));
                t += step;
            }
            out
        }
    }
}

fn marker_svg(out: &mut String, m: Marker, x: f64, y: f64, color: &str) {
    let r = 3.5;
    let _ = match m {
        Marker::Circle => writeln!(out, r#"<circle class="marker" cx="{x:.2}" cy="{y:.2}" r="{r}" fill="none" stroke="{color}"/>"#),
        Marker::Cross => writeln!(
            out,
            r#"<path class="marker" d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{color}"/>"#,
            x - r, y - r, x + r, y + r, x - r, y + r, x + r, y - r
        ),
        Marker::Plus => writeln!(
            out,
            r#"<path class="marker" d="M{:.2},{y:.2}L{:.2},{y:.2}M{x:.2},{:.2}L{x:.2},{:.2}" stroke="{color}"/>"#,
            x - r, x + r, y - r, y + r
        ),
        Marker::Square => writeln!(
            out,
            r#"<rect class="marker" x="{:.2}" y="{:.2}" width="{}" height="{}" fill="none" stroke="{color}"/>"#,
            x - r, y - r, 2.0 * r, 2.0 * r
        ),
        Marker::Triangle => writeln!(
            out,
            r#"<path class="marker" d="M{x:.2},{:.2}L{:.2},{:.2}L{:.2},{:.2}Z" fill="none" stroke="{color}"/>"#,
            y - r, x + r, y + r, x - r, y + r
        ),
        Marker::Diamond => writeln!(
            out,
            r#"<path class="marker" d="M{x:.2},{:.2}L{:.2},{y:.2}L{x:.2},{:.2}L{:.2},{y:.2}Z" fill="none" stroke="{color}"/>"#,
            y - r, x + r, y + r, x - r
        ),
    };
}

pub fn render(plot: &Plot) -> String {
    let xs = Axis::new(plot.log_x, plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let ys = Axis::new(plot.log_y, plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let to_px = |x: f64, y: f64| -> Option<(f64, f64)> {
        Some((LEFT + xs.frac(x)? * pw, TOP + (1.0 - ys.frac(y)?) * ph))
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{}" y="25" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        escape(&plot.title)
    );
    let _ = writeln!(out, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##);
    for (v, label) in xs.ticks() {
        if let Some(f) = xs.frac(v) {
            let px = LEFT + f * pw;
            let _ = writeln!(
                out,
                r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{}" stroke="#ddd"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"##,
                TOP + ph,
                TOP + ph + 18.0,
                escape(&label)
            );
        }
    }
    for (v, label) in ys.ticks() {
        if let Some(f) = ys.frac(v) {
            let py = TOP + (1.0 - f) * ph;
            let _ = writeln!(
                out,
                r##"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                py + 4.0,
                escape(&label)
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 15.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&plot.y_label)
    );

    for s in &plot.series {
        let color = escape(&s.color);
        if s.connect {
            let pts: Vec<String> = s
                .points
                .iter()
                .filter_map(|&(x, y)| to_px(x, y))
                .map(|(x, y)| format!("{x:.2},{y:.2}"))
                .collect();
            if pts.len() > 1 {
                let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{color}"{dash}/>"#,
                    pts.join(" ")
                );
            }
        }
        if let Some(m) = s.marker {
            for &(x, y) in &s.points {
                if let Some((px, py)) = to_px(x, y) {
                    marker_svg(&mut out, m, px, py, &color);
                }
            }
        }
    }

    for (i, s) in plot.series.iter().enumerate() {
        let y = TOP + 16.0 + 16.0 * i as f64;
        let x = LEFT + 12.0;
        let color = escape(&s.color);
        match s.marker {
            Some(_) => {
                let _ = writeln!(out, r#"<circle cx="{x}" cy="{}" r="3.5" fill="{color}"/>"#, y - 4.0);
            }
            None => {
                let _ = writeln!(
                    out,
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-dasharray="6 4"/>"#,
                    x - 8.0,
                    y - 4.0,
                    x + 8.0,
                    y - 4.0
                );
            }
        }
        let _ = writeln!(out, r#"<text x="{}" y="{y}">{}</text>"#, x + 14.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_text() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn log_ticks_are_decades() {
        let ax = Axis::new(true, [3.0, 2e4].into_iter());
        assert_eq!((ax.lo, ax.hi), (0.0, 5.0));
        assert_eq!(ax.ticks().len(), 6);
    }

    #[test]
    fn linear_ticks_cover_range() {
        let ax = Axis::new(false, [0.0, 0.9].into_iter());
        let t = ax.ticks();
        assert!(t.len() >= 4);
        assert!(t.iter().all(|(v, _)| *v >= 0.0 && *v <= 0.9 + 1e-12));
    }

    #[test]
    fn one_marker_per_point_and_none_for_references() {
        let plot = Plot {
            title: "t".into(),
            log_x: true,
            log_y: true,
            series: vec![
                Series::scatter("a", 0, vec![(1.0, 2.0), (10.0, 20.0)]),
                Series::scatter("b", 1, vec![(5.0, 3.0)]),
                Series::reference("ref", "#000", vec![(1.0, 1.0), (10.0, 10.0)]),
            ],
            ..Default::default()
        };
        let svg = render(&plot);
        assert_eq!(svg.matches(r#"class="marker""#).count(), 3);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn degenerate_data_still_renders() {
        let plot = Plot {
            log_y: true,
            series: vec![Series::scatter("a", 0, vec![(1.0, 0.0), (1.0, f64::NAN)])],
            ..Default::default()
        };
        assert!(render(&plot).ends_with("</svg>\n"));
    }
}

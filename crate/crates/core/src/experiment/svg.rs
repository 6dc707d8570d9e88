//! Minimal standalone log-log SVG plots of experiment records.

use std::fmt::Write as _;
use std::path::Path;

use super::ExperimentRecord;
use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Column plotted on the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    ErrCur,
    ErrSvd,
    PredCur,
    PredSvd,
}

impl Field {
    fn get(self, r: &ExperimentRecord) -> f64 {
        match self {
            Field::ErrCur => r.err_cur,
            Field::ErrSvd => r.err_svd,
            Field::PredCur => r.pred_cur,
            Field::PredSvd => r.pred_svd,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Field::ErrCur => "CUR error",
            Field::ErrSvd => "SVD error",
            Field::PredCur => "CUR first order",
            Field::PredSvd => "SVD first order",
        }
    }

    fn is_prediction(self) -> bool {
        matches!(self, Field::PredCur | Field::PredSvd)
    }
}

/// Column plotted on the horizontal axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    Epsilon,
    Alpha,
}

/// Which series to draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub title: String,
    pub x: XAxis,
    pub fields: Vec<Field>,
    /// One series per distinct ε (visibility sweeps).
    pub split_by_epsilon: bool,
}

impl SeriesSpec {
    /// Errors and predictions of both maps against ε.
    pub fn versus_epsilon(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x: XAxis::Epsilon,
            fields: vec![Field::ErrCur, Field::PredCur, Field::ErrSvd, Field::PredSvd],
            split_by_epsilon: false,
        }
    }

    /// CUR error and prediction against α, one pair per ε.
    pub fn versus_alpha(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x: XAxis::Alpha,
            fields: vec![Field::ErrCur, Field::PredCur],
            split_by_epsilon: true,
        }
    }
}

struct Series {
    label: String,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

/// Affine map from `(log₁₀ x, log₁₀ y)` to pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFrame {
    /// Decade range on each axis, `(lo, hi)` in log₁₀ units.
    pub x_decades: (f64, f64),
    pub y_decades: (f64, f64),
}

impl LogLogFrame {
    /// Smallest whole-decade frame containing every point.
    fn covering(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
        let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            xs = (xs.0.min(x.log10()), xs.1.max(x.log10()));
            ys = (ys.0.min(y.log10()), ys.1.max(y.log10()));
        }
        let decades = |(lo, hi): (f64, f64)| {
            if !lo.is_finite() {
                return (0.0, 1.0);
            }
            let (lo, hi) = (lo.floor(), hi.ceil());
            if hi > lo {
                (lo, hi)
            } else {
                (lo, lo + 1.0)
            }
        };
        Self { x_decades: decades(xs), y_decades: decades(ys) }
    }

    /// Pixel position of a data point.
    pub fn to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        let (w, h) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let fx = (x.log10() - self.x_decades.0) / (self.x_decades.1 - self.x_decades.0);
        let fy = (self.y_decades.1 - y.log10()) / (self.y_decades.1 - self.y_decades.0);
        (LEFT + fx * w, TOP + fy * h)
    }
}

fn collect_series(records: &[ExperimentRecord], spec: &SeriesSpec) -> (Vec<Series>, usize) {
    let x_of = |r: &ExperimentRecord| match spec.x {
        XAxis::Epsilon => Some(r.epsilon),
        XAxis::Alpha => r.alpha,
    };
    let mut groups: Vec<(Option<f64>, Vec<&ExperimentRecord>)> = Vec::new();
    for r in records {
        let key = spec.split_by_epsilon.then_some(r.epsilon);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    let mut omitted = 0;
    let mut series = Vec::new();
    for (key, rows) in &groups {
        for &field in &spec.fields {
            let mut points = Vec::new();
            for r in rows {
                let (x, y) = (x_of(r), field.get(r));
                match x {
                    Some(x) if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() => points.push((x, y)),
                    _ => omitted += 1,
                }
            }
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let label = match key {
                Some(eps) => format!("{} (ε={eps:e})", field.label()),
                None => field.label().to_string(),
            };
            series.push(Series { label, dashed: field.is_prediction(), points });
        }
    }
    (series, omitted)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the plot as a standalone SVG 1.1 document. Non-positive values
/// cannot be placed on log axes; they are dropped and counted in the title.
pub fn render_svg_loglog(records: &[ExperimentRecord], spec: &SeriesSpec) -> String {
    let (series, omitted) = collect_series(records, spec);
    let frame = LogLogFrame::covering(series.iter().flat_map(|s| s.points.iter().copied()));
    let (x0, y0) = (LEFT, TOP);
    let (x1, y1) = (WIDTH - RIGHT, HEIGHT - BOTTOM);

    let mut title = spec.title.clone();
    if omitted > 0 {
        let _ = write!(title, " ({omitted} non-positive points omitted)");
    }

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, "<title>{}</title>", escape(&title));
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="30" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        escape(&title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );

    // decade ticks and grid lines
    let (xl, xh) = frame.x_decades;
    for d in (xl as i64)..=(xh as i64) {
        let (px, _) = frame.to_pixel(10f64.powi(d as i32), 1.0);
        let _ = writeln!(svg, r##"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{y1}" stroke="#dddddd"/>"##);
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">1e{d}</text>"#,
            y1 + 18.0
        );
    }
    let (yl, yh) = frame.y_decades;
    for d in (yl as i64)..=(yh as i64) {
        let (_, py) = frame.to_pixel(1.0, 10f64.powi(d as i32));
        let _ = writeln!(svg, r##"<line x1="{x0}" y1="{py:.2}" x2="{x1}" y2="{py:.2}" stroke="#dddddd"/>"##);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">1e{d}</text>"#,
            x0 - 8.0,
            py + 4.0
        );
    }
    let x_label = match spec.x {
        XAxis::Epsilon => "ε",
        XAxis::Alpha => "α",
    };
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{x_label}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        if !s.points.is_empty() {
            let coords: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| {
                    let (px, py) = frame.to_pixel(x, y);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = TOP + 20.0 + 20.0 * i as f64;
        let lx = x1 + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#,
            lx + 25.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg_loglog(records: &[ExperimentRecord], spec: &SeriesSpec, path: &Path) -> Result<()> {
    let doc = render_svg_loglog(records, spec);
    std::fs::write(path, doc).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

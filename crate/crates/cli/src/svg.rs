//! Deterministic scatter-plot SVG: identical input bytes in, identical SVG
//! bytes out. Markers are colored by expression with a fixed palette over
//! the sorted label set.

use std::collections::BTreeSet;
use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct ScatterPoint {
    pub id: String,
    pub expression: Option<String>,
    pub x: f64,
    pub y: f64,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
];

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (-1.0, 1.0);
    }
    if lo == hi {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

/// Renders the scatter plot. An empty point set yields a valid SVG with axes
/// only.
pub fn emit_scatter_svg(points: &[ScatterPoint], x_label: &str, y_label: &str) -> String {
    let (x_min, x_max) = axis_range(points.iter().map(|p| p.x));
    let (y_min, y_max) = axis_range(points.iter().map(|p| p.y));
    let to_px = |x: f64, y: f64| {
        let px = MARGIN + (x - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
        let py = HEIGHT - MARGIN - (y - y_min) / (y_max - y_min) * (HEIGHT - 2.0 * MARGIN);
        (px, py)
    };

    let labels: BTreeSet<&str> = points
        .iter()
        .filter_map(|p| p.expression.as_deref())
        .collect();
    let color_of = |expression: Option<&str>| -> &str {
        match expression {
            None => "#444444",
            Some(e) => {
                let index = labels.iter().position(|&l| l == e).unwrap_or(0);
                PALETTE[index % PALETTE.len()]
            }
        }
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    // axes
    let x0 = MARGIN;
    let x1 = WIDTH - MARGIN;
    let y0 = HEIGHT - MARGIN;
    let y1 = MARGIN;
    let _ = write!(
        svg,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{}</text>",
        WIDTH / 2.0,
        HEIGHT - 14.0,
        xml_escape(x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 {:.1})\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        xml_escape(y_label)
    );
    // range annotations at the axis ends
    let _ = write!(
        svg,
        "<text x=\"{x0:.1}\" y=\"{:.1}\" font-size=\"10\">{x_min:.3}</text>\n<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"10\">{x_max:.3}</text>\n",
        y0 + 16.0,
        x1,
        y0 + 16.0
    );
    let _ = write!(
        svg,
        "<text x=\"{:.1}\" y=\"{y0:.1}\" text-anchor=\"end\" font-size=\"10\">{y_min:.3}</text>\n<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"10\">{y_max:.3}</text>\n",
        x0 - 6.0,
        x0 - 6.0,
        y1 + 4.0
    );

    for point in points {
        let (px, py) = to_px(point.x, point.y);
        let _ = writeln!(
            svg,
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.75\"><title>{}</title></circle>",
            color_of(point.expression.as_deref()),
            xml_escape(&point.id)
        );
    }

    // legend
    for (index, label) in labels.iter().enumerate() {
        let ly = MARGIN + 16.0 * index as f64;
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.1}\" cy=\"{ly:.1}\" r=\"4\" fill=\"{}\"/><text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\">{}</text>",
            x1 - 120.0,
            PALETTE[index % PALETTE.len()],
            x1 - 110.0,
            ly + 4.0,
            xml_escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

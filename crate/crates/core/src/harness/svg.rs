//! Minimal self-contained SVG line plots.

use std::fmt::Write as _;

use super::table::{ResultTable, TableError};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub column: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_column: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub log_y: bool,
}

impl PlotSpec {
    pub fn new(title: &str, x_column: &str, x_label: &str, y_label: &str, log_y: bool) -> Self {
        Self {
            title: title.to_string(),
            x_column: x_column.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            series: Vec::new(),
            log_y,
        }
    }

    pub fn series(mut self, column: &str, label: &str) -> Self {
        self.series.push(Series { column: column.to_string(), label: label.to_string() });
        self
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            return Axis { lo: lo - 0.5, hi: hi + 0.5 };
        }
        Axis { lo, hi }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

/// Renders `table` as an SVG document. Each series becomes one polyline over
/// the rows where both coordinates are usable; with `log_y` only positive
/// values are plotted, on a base-10 scale.
pub fn emit_svg(table: &ResultTable, spec: &PlotSpec) -> Result<String, TableError> {
    let xs = table.column(&spec.x_column)?;
    let mut lines: Vec<Vec<(f64, f64)>> = Vec::new();
    for s in &spec.series {
        let ys = table.column(&s.column)?;
        let pts = xs
            .iter()
            .zip(&ys)
            .filter_map(|(x, y)| {
                let (x, y) = (x.as_f64()?, y.as_f64()?);
                if spec.log_y {
                    (y > 0.0).then(|| (x, y.log10()))
                } else {
                    Some((x, y))
                }
            })
            .collect();
        lines.push(pts);
    }
    let x_axis = Axis::fit(lines.iter().flatten().map(|p| p.0));
    let y_axis = Axis::fit(lines.iter().flatten().map(|p| p.1));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + x_axis.frac(x) * plot_w;
    let py = |y: f64| TOP + (1.0 - y_axis.frac(y)) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, LEFT + plot_w / 2.0, escape(&spec.title));
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{LEFT}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b}"/></g>"#,
        b = TOP + plot_h,
        r = LEFT + plot_w
    );
    for t in 0..=4 {
        let f = t as f64 / 4.0;
        let xv = x_axis.lo + f * (x_axis.hi - x_axis.lo);
        let yv = y_axis.lo + f * (y_axis.hi - y_axis.lo);
        let y_text = if spec.log_y { format!("1e{yv:.1}") } else { format!("{yv:.3}") };
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xv:.3}</text>"#,
            px(xv),
            TOP + plot_h + 18.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y_text}</text>"#, LEFT - 6.0, py(yv) + 4.0);
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0,
        escape(&spec.x_label)
    );
    let y_label = if spec.log_y { format!("{} (log scale)", spec.y_label) } else { spec.y_label.clone() };
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&y_label)
    );
    for (j, pts) in lines.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            COLORS[j % COLORS.len()],
            coords.join(" ")
        );
    }
    let _ = writeln!(out, r#"<g class="legend">"#);
    for (j, s) in spec.series.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * j as f64;
        let x = LEFT + plot_w + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 20.0,
            COLORS[j % COLORS.len()],
            x + 26.0,
            y + 4.0,
            escape(&s.label)
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::table::Cell;

    fn spec() -> PlotSpec {
        PlotSpec::new("t", "x", "x", "y", false).series("y", "series <y>")
    }

    #[test]
    fn empty_table_draws_axes_only() {
        let t = ResultTable::new(&["x", "y"]);
        let svg = emit_svg(&t, &spec()).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains(r#"class="axes""#));
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert!(svg.contains("series &lt;y&gt;"));
    }

    #[test]
    fn two_points_one_polyline() {
        let mut t = ResultTable::new(&["x", "y"]);
        t.push(vec![Cell::Num(0.0), Cell::Num(1.0)]).unwrap();
        t.push(vec![Cell::Num(1.0), Cell::Num(3.0)]).unwrap();
        let svg = emit_svg(&t, &spec()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 2);
        assert_eq!(svg, emit_svg(&t, &spec()).unwrap());
    }

    #[test]
    fn log_scale_skips_nonpositive() {
        let mut t = ResultTable::new(&["x", "y"]);
        for (x, y) in [(0.0, 0.0), (1.0, 10.0), (2.0, 1e20), (3.0, f64::INFINITY)] {
            t.push(vec![Cell::Num(x), Cell::Num(y)]).unwrap();
        }
        let spec = PlotSpec { log_y: true, ..spec() };
        let svg = emit_svg(&t, &spec).unwrap();
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 2);
        assert!(svg.contains("(log scale)"));
    }

    #[test]
    fn missing_column_is_an_error() {
        let t = ResultTable::new(&["x"]);
        assert_eq!(emit_svg(&t, &spec()), Err(TableError::MissingColumn("y".into())));
    }
}

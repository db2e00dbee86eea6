//! Self-contained SVG line plots for sweep tables.
//!
//! Fixed 800x600 canvas, five ticks per axis, one polyline per curve (split
//! at skipped cells rather than interpolated across). Layout only; nothing
//! here is meant to be compared pixel by pixel.

use crate::csvio::PlotData;
use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 780.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 550.0;
const TICKS: usize = 5;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        return format!("{v:.2e}");
    }
    let mut s = format!("{v:.4}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

pub fn render(data: &PlotData) -> String {
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, vals) in &data.rows {
        x_min = x_min.min(*x);
        x_max = x_max.max(*x);
        for v in vals.iter().flatten().filter(|v| v.is_finite()) {
            y_min = y_min.min(*v);
            y_max = y_max.max(*v);
        }
    }
    if !y_min.is_finite() {
        (y_min, y_max) = (0.0, 1.0);
    }
    if x_max == x_min {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_max == y_min {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * (RIGHT - LEFT);
    let py = |y: f64| BOTTOM - (y - y_min) / (y_max - y_min) * (BOTTOM - TOP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<line x1=\"{LEFT}\" y1=\"{BOTTOM}\" x2=\"{RIGHT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>"
    );

    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let xv = x_min + f * (x_max - x_min);
        let xp = px(xv);
        let _ = writeln!(
            s,
            "<line class=\"tick\" x1=\"{xp:.2}\" y1=\"{BOTTOM}\" x2=\"{xp:.2}\" y2=\"{}\" stroke=\"black\"/>",
            BOTTOM + 5.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{xp:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            BOTTOM + 20.0,
            fmt_tick(xv)
        );
        let yv = y_min + f * (y_max - y_min);
        let yp = py(yv);
        let _ = writeln!(
            s,
            "<line class=\"tick\" x1=\"{}\" y1=\"{yp:.2}\" x2=\"{LEFT}\" y2=\"{yp:.2}\" stroke=\"black\"/>",
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            LEFT - 9.0,
            yp + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 40.0,
        data.x_name
    );

    for (ci, name) in data.columns.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        // one polyline per gap-free run; an isolated point becomes a dot
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, s: &mut String| {
            if run.len() >= 2 {
                let _ = writeln!(
                    s,
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
                    run.join(" ")
                );
            } else if let Some((cx, cy)) = run.first().and_then(|p| p.split_once(',')) {
                let _ = writeln!(s, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"2\" fill=\"{color}\"/>");
            }
            run.clear();
        };
        for (x, vals) in &data.rows {
            match vals[ci] {
                Some(v) if v.is_finite() => {
                    run.push(format!("{:.2},{:.2}", px(*x), py(v)));
                }
                _ => flush(&mut run, &mut s),
            }
        }
        flush(&mut run, &mut s);

        let ly = TOP + 16.0 * (ci + 1) as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            RIGHT - 160.0,
            RIGHT - 130.0
        );
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">{name}</text>", RIGHT - 124.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PlotData {
        PlotData {
            x_name: "x".into(),
            columns: vec!["a".into(), "b".into()],
            rows: vec![
                (0.0, vec![Some(0.0), Some(1.0)]),
                (1.0, vec![Some(0.5), None]),
                (2.0, vec![Some(0.25), Some(0.75)]),
                (3.0, vec![Some(0.125), Some(0.5)]),
            ],
        }
    }

    #[test]
    fn structure() {
        let svg = render(&sample());
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        // curve a unbroken; b has an isolated first point, then a 2-point run
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("class=\"tick\"").count(), 10);
        assert!(svg.contains(">a</text>"));
        assert!(svg.contains(">b</text>"));
    }

    #[test]
    fn degenerate_ranges_stay_finite() {
        let data = PlotData {
            x_name: "x".into(),
            columns: vec!["a".into()],
            rows: vec![(1.0, vec![Some(0.5)]), (1.0, vec![Some(0.5)])],
        };
        let svg = render(&data);
        assert!(!svg.contains("NaN"));
        assert!(!svg.contains("inf"));
    }

    #[test]
    fn tick_labels() {
        assert_eq!(fmt_tick(0.0), "0");
        assert_eq!(fmt_tick(2.0), "2");
        assert_eq!(fmt_tick(0.125), "0.125");
        assert_eq!(fmt_tick(0.30000000000000004), "0.3");
        assert_eq!(fmt_tick(12345.0), "1.23e4");
    }
}

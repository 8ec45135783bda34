use std::fmt::Write;

use super::SweepOutcome;

/// Shortest round-trip text of `x` after rounding to 12 significant digits.
/// Plain notation for magnitudes in `[1e-4, 1e15)`, scientific otherwise.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Header plus one LF-terminated line per row.
pub fn to_csv(outcome: &SweepOutcome) -> String {
    let mut s = outcome.header.join(",");
    s.push('\n');
    for row in &outcome.rows {
        let fields: Vec<String> = row.all_values(&outcome.header).into_iter().map(format_value).collect();
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 260.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Series {
    label: String,
    /// CSV text of each (x, y) pair.
    points: Vec<(String, String)>,
    values: Vec<(f64, f64)>,
}

fn series(outcome: &SweepOutcome) -> Vec<Series> {
    let header = &outcome.header;
    let has_d = header.get(1).map(String::as_str) == Some("d");
    let first = if has_d { 2 } else { 1 };
    let mut dims: Vec<usize> = outcome.rows.iter().map(|r| r.dim).collect();
    dims.dedup();
    let mut out = Vec::new();
    for col in first..header.len() {
        for &d in &dims {
            let rows: Vec<_> = outcome.rows.iter().filter(|r| !has_d || r.dim == d).collect();
            let values: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| {
                    let all = r.all_values(header);
                    (all[0], all[col])
                })
                .collect();
            out.push(Series {
                label: if has_d { format!("{} (d={d})", header[col]) } else { header[col].clone() },
                points: values.iter().map(|&(x, y)| (format_value(x), format_value(y))).collect(),
                values,
            });
            if !has_d {
                break;
            }
        }
    }
    out
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo > 0.0 {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Line chart with one polyline per reported quantity. Each polyline
/// carries the CSV text of its points in `data-points`.
pub fn to_svg(outcome: &SweepOutcome, title: &str) -> String {
    let all = series(outcome);
    let xs = all.iter().flat_map(|s| s.values.iter().map(|v| v.0));
    let ys = all.iter().flat_map(|s| s.values.iter().map(|v| v.1));
    let (x0, x1) = span(xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) = span(
        ys.clone().fold(f64::INFINITY, f64::min).min(0.0),
        ys.fold(f64::NEG_INFINITY, f64::max),
    );
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b}"/></g>"#,
        b = TOP + ph,
        r = LEFT + pw
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            sx(xv),
            TOP + ph + 18.0,
            format_value(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            sy(yv) + 4.0,
            format_value(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(&outcome.header[0])
    );
    for (i, ser) in all.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pixels: Vec<String> = ser.values.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let data: Vec<String> = ser.points.iter().map(|(x, y)| format!("{x},{y}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" data-label="{}" data-points="{}" points="{}"/>"#,
            escape(&ser.label),
            data.join(" "),
            pixels.join(" ")
        );
        let ly = TOP + 12.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT + 16.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(-0.0), "0");
        assert_eq!(format_value(0.25), "0.25");
        assert_eq!(format_value(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_value(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_value(0.1 + 0.2), "0.3");
        assert_eq!(format_value(1.5e-20), "1.5e-20");
        assert_eq!(format_value(-3.0), "-3");
        assert_eq!(format_value(1e-4), "0.0001");
    }
}

//! Minimal single-panel line plots.

use std::fmt::Write as _;

use super::csv::{fmt_g, CsvTable};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SvgError {
    UnknownColumn(String),
    NoData,
}

impl std::fmt::Display for SvgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SvgError::UnknownColumn(c) => write!(f, "unknown plot column '{c}'"),
            SvgError::NoData => write!(f, "nothing to plot: no finite data rows"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    /// Log scale when the data is positive and spans more than 1.5 decades.
    fn fit(values: impl Iterator<Item = f64> + Clone) -> Self {
        let lo = values.clone().fold(f64::INFINITY, f64::min);
        let hi = values.fold(f64::NEG_INFINITY, f64::max);
        let log = lo > 0.0 && hi / lo >= 50.0;
        let (lo, hi) = if lo == hi {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        };
        Self { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        if self.log {
            (v.ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }
}

/// Plot column `y` against column `x`, one polyline per table.
pub fn emit_svg(tables: &[CsvTable], x: &str, y: &str) -> Result<String, SvgError> {
    let mut series = Vec::new();
    for t in tables {
        let xs = t
            .column(x)
            .ok_or_else(|| SvgError::UnknownColumn(x.into()))?;
        let ys = t
            .column(y)
            .ok_or_else(|| SvgError::UnknownColumn(y.into()))?;
        let pts: Vec<(f64, f64)> = xs
            .into_iter()
            .zip(ys)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .collect();
        series.push((t.label.clone(), pts));
    }
    if series.iter().all(|(_, p)| p.is_empty()) {
        return Err(SvgError::NoData);
    }

    let all = || series.iter().flat_map(|(_, p)| p.iter());
    let mut ax = Axis::fit(all().map(|p| p.0));
    let mut ay = Axis::fit(all().map(|p| p.1));
    // a log axis cannot show non-positive values
    ax.log &= all().all(|p| p.0 > 0.0);
    ay.log &= all().all(|p| p.1 > 0.0);

    let pw = WIDTH - 2.0 * MARGIN;
    let ph = HEIGHT - 2.0 * MARGIN;
    let px = |v: f64| MARGIN + pw * ax.unit(v);
    let py = |v: f64| HEIGHT - MARGIN - ph * ay.unit(v);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let bottom = HEIGHT - MARGIN;
    let right = WIDTH - MARGIN;
    let label_y = bottom + 16.0;
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{label_y}" text-anchor="start">{}</text>"#,
        fmt_g(ax.lo)
    );
    let _ = writeln!(
        s,
        r#"<text x="{right}" y="{label_y}" text-anchor="end">{}</text>"#,
        fmt_g(ax.hi)
    );
    let tick_x = MARGIN - 4.0;
    let _ = writeln!(
        s,
        r#"<text x="{tick_x}" y="{bottom}" text-anchor="end">{}</text>"#,
        fmt_g(ay.lo)
    );
    let _ = writeln!(
        s,
        r#"<text x="{tick_x}" y="{}" text-anchor="end">{}</text>"#,
        MARGIN + 12.0,
        fmt_g(ay.hi)
    );
    let scale = |a: &Axis| if a.log { " (log)" } else { "" };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        escape(x),
        scale(&ax)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y),
        scale(&ay)
    );

    for (k, (label, pts)) in series.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let colour = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(a, b)| format!("{:.2},{:.2}", px(a), py(b)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        if let Some(l) = label {
            let ly = MARGIN + 16.0 * (k as f64 + 1.0);
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{ly}" text-anchor="end" fill="{colour}">{}</text>"#,
                right - 6.0,
                escape(l)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> CsvTable {
        let mut t = CsvTable::new(&["Qx", "xi2"]);
        for k in 0..10 {
            let q = 10f64.powf(k as f64 / 3.0);
            t.push(vec![q, 1.0 / (1.0 + q)]);
        }
        t
    }

    #[test]
    fn one_polyline_per_table() {
        let svg = emit_svg(&[table()], "Qx", "xi2").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("Qx (log)"));
        let two = emit_svg(&[table(), table().labeled("b")], "Qx", "xi2").unwrap();
        assert_eq!(two.matches("<polyline").count(), 2);
    }

    #[test]
    fn deterministic_bytes() {
        assert_eq!(
            emit_svg(&[table()], "Qx", "xi2"),
            emit_svg(&[table()], "Qx", "xi2")
        );
    }

    #[test]
    fn errors() {
        assert_eq!(
            emit_svg(&[table()], "Qx", "nope"),
            Err(SvgError::UnknownColumn("nope".into()))
        );
        let empty = CsvTable::new(&["Qx", "xi2"]);
        assert_eq!(emit_svg(&[empty], "Qx", "xi2"), Err(SvgError::NoData));
    }

    #[test]
    fn power_law_is_straight_on_log_axes() {
        let mut t = CsvTable::new(&["S", "xi2_min"]);
        for s in [1e2, 1e3, 1e4, 1e5] {
            t.push(vec![s, 2.0 * f64::powf(s, -2.0 / 3.0)]);
        }
        let svg = emit_svg(&[t], "S", "xi2_min").unwrap();
        let pts: Vec<(f64, f64)> = svg
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap()
            .split(' ')
            .map(|p| {
                let (a, b) = p.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        let slope = |i: usize, j: usize| (pts[j].1 - pts[i].1) / (pts[j].0 - pts[i].0);
        assert!((slope(0, 1) - slope(2, 3)).abs() < 0.01 * slope(0, 3).abs());
    }
}

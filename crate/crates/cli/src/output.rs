//! CSV and SVG writers. CSV is the contract; the SVG plots are previews.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::config::RunConfig;

/// Nine significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else {
        x.to_string()
    }
}

/// A CSV table preceded by `# key = value` metadata lines.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    extra_meta: Vec<(String, String)>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            extra_meta: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.extra_meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, cfg: &RunConfig, command: &str) -> String {
        let mut s = String::new();
        writeln!(s, "# command = {command}").unwrap();
        for (k, v) in cfg.metadata() {
            writeln!(s, "# {k} = {v}").unwrap();
        }
        for (k, v) in &self.extra_meta {
            writeln!(s, "# {k} = {v}").unwrap();
        }
        writeln!(s, "{}", self.header.join(",")).unwrap();
        for r in &self.rows {
            writeln!(s, "{}", r.join(",")).unwrap();
        }
        s
    }

    pub fn write(&self, path: &Path, cfg: &RunConfig, command: &str) -> io::Result<()> {
        fs::write(path, self.render(cfg, command))
    }
}

/// One polyline of a plot.
pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub y: &'a [f64],
}

const W: f64 = 720.0;
const H: f64 = 440.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 30.0;
const MB: f64 = 50.0;

/// Renders intensity against detuning as a standalone SVG document.
pub fn svg_plot(title: &str, x: &[f64], series: &[Series], log_y: bool) -> String {
    let tf = |v: f64| if log_y { v.max(f64::MIN_POSITIVE).log10() } else { v };
    let (x0, x1) = (x[0], x[x.len() - 1]);
    let mut ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.y.iter().copied())
        .filter(|v| v.is_finite() && (!log_y || *v > 0.0))
        .map(tf)
        .collect();
    ys.sort_by(f64::total_cmp);
    let (mut y0, mut y1) = match (ys.first(), ys.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0.0, 1.0),
    };
    if log_y {
        // Six decades below the maximum is plenty for a lineshape.
        y0 = y0.max(y1 - 6.0);
    } else {
        y0 = y0.min(0.0);
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |v: f64| ML + (v - x0) / (x1 - x0).max(f64::MIN_POSITIVE) * (W - ML - MR);
    let py = |v: f64| H - MB - (tf(v).clamp(y0, y1) - y0) / (y1 - y0) * (H - MT - MB);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, W / 2.0, escape(title)).unwrap();
    writeln!(
        s,
        r#"<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - ML - MR,
        H - MT - MB
    )
    .unwrap();
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let xp = px(xv);
        writeln!(
            s,
            r#"<text x="{xp:.1}" y="{:.1}" text-anchor="middle">{xv:.0}</text>"#,
            H - MB + 16.0
        )
        .unwrap();
        let yv = y0 + f * (y1 - y0);
        let yp = H - MB - f * (H - MT - MB);
        let label = if log_y { format!("1e{yv:.1}") } else { format!("{yv:.3e}") };
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#, ML - 4.0, yp + 4.0).unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">laser detuning from exciton (ueV)</text>"#,
        W / 2.0,
        H - 12.0
    )
    .unwrap();
    for (n, ser) in series.iter().enumerate() {
        let mut pts = String::new();
        for (&xv, &yv) in x.iter().zip(ser.y) {
            if yv.is_finite() {
                write!(pts, "{:.2},{:.2} ", px(xv), py(yv)).unwrap();
            }
        }
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            ser.color,
            pts.trim_end()
        )
        .unwrap();
        let ly = MT + 16.0 + 16.0 * n as f64;
        writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{}" text-anchor="end">{}</text>"#,
            W - MR - 8.0,
            ser.color,
            escape(ser.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(120.0), "1.20000000e2");
        assert_eq!(num(-0.000123456789123), "-1.23456789e-4");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 0.0];
        for log_y in [false, true] {
            let s = svg_plot("a<b", &x, &[Series { label: "i_x", color: "red", y: &y }], log_y);
            assert!(s.starts_with("<svg"));
            assert!(s.trim_end().ends_with("</svg>"));
            assert!(s.contains("a&lt;b"));
            assert_eq!(s.matches("<polyline").count(), 1);
        }
    }
}

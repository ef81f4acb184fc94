use std::fmt::Write as _;
use std::io::Write;

use super::integrator::{ControlInput, Trajectory};
use crate::error::{Error, Result};

fn io_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Config(format!("write failed: {e}"))
}

/// Full-precision float formatting (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `t, state..., u...` rows as RFC-4180 CSV.
pub fn write_trajectory_csv<W: Write>(
    w: W,
    traj: &Trajectory,
    state_names: &[String],
    law: Option<&dyn ControlInput>,
) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    header.extend(state_names.iter().cloned());
    let k = law.map_or(0, |l| l.channels());
    header.extend((1..=k).map(|a| format!("u{a}")));
    wr.write_record(&header).map_err(io_err)?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let mut rec = vec![fmt_f64(*t)];
        rec.extend(x.iter().map(|v| fmt_f64(*v)));
        if let Some(l) = law {
            rec.extend(l.eval(*t).into_iter().map(fmt_f64));
        }
        wr.write_record(&rec).map_err(io_err)?;
    }
    wr.flush().map_err(io_err)
}

/// Writes a header plus numeric rows.
pub fn write_table_csv<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header).map_err(io_err)?;
    for r in rows {
        wr.write_record(r.iter().map(|v| fmt_f64(*v))).map_err(io_err)?;
    }
    wr.flush().map_err(io_err)
}

/// One polyline of a chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub color: &'static str,
}

/// Minimal SVG line chart.
pub fn svg_chart(title: &str, series: &[Series]) -> String {
    let (w, h, pad) = (720.0, 360.0, 48.0);
    let finite = |v: &f64| v.is_finite();
    let xs = series.iter().flat_map(|s| s.xs.iter().copied().filter(finite));
    let ys = series.iter().flat_map(|s| s.ys.iter().copied().filter(finite));
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(y1 > y0) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{pad} {pad} L{pad} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        b = h - pad,
        r = w - pad
    );
    for (v, y) in [(y0, h - pad), (y1, pad)] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{v:.3e}</text>"#, pad - 4.0, y + 3.0);
    }
    for (v, x) in [(x0, pad), (x1, w - pad)] {
        let _ = writeln!(s, r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{v:.3}</text>"#, h - pad + 14.0);
    }
    for (k, ser) in series.iter().enumerate() {
        let mut pts = String::new();
        for (x, y) in ser.xs.iter().zip(&ser.ys) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(*x), sy(*y));
            }
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1" points="{}"/>"#, ser.color, pts.trim_end());
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{}">{}</text>"#,
            w - pad - 120.0,
            pad + 14.0 * k as f64,
            ser.color,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

//! Minimal SVG charts for run and sweep reports.

use std::fmt::Write as _;

use crate::pipeline::{RunReport, SweepResult};
use crate::resys::DesignVariables;

const W: f64 = 640.0;
const H: f64 = 360.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 70.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round the axis maximum up to 1, 2 or 5 times a power of ten.
fn nice_max(v: f64) -> f64 {
    if !(v > 0.0) || !v.is_finite() {
        return 1.0;
    }
    let p = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * p).find(|&m| m >= v).unwrap_or(10.0 * p)
}

fn y_axis(out: &mut String, max: f64, x: f64, anchor: &str, label: &str) {
    let plot_h = H - TOP - BOTTOM;
    for i in 0..=4 {
        let v = max * i as f64 / 4.0;
        let y = H - BOTTOM - plot_h * i as f64 / 4.0;
        let dx = if anchor == "end" { -6.0 } else { 6.0 };
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}">{}</text>"#,
            x + dx,
            y + 4.0,
            fmt_tick(v)
        );
        if anchor == "end" {
            let _ = writeln!(
                out,
                r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##,
                W - RIGHT
            );
        }
    }
    let lx = if anchor == "end" { 16.0 } else { W - 16.0 };
    let _ = writeln!(
        out,
        r#"<text x="{lx}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {lx} {:.1})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(label)
    );
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Grouped bars of the representative design next to the reference design.
pub fn design_bar_chart(report: &RunReport) -> String {
    let repr = report.dv_repr.as_array();
    let reference = report.dv_ref.map(|d| d.as_array());
    let max = repr
        .iter()
        .chain(reference.iter().flatten())
        .copied()
        .fold(0.0, f64::max);
    let max = nice_max(max);
    let mut out = String::new();
    header(&mut out, &format!("Design variables ({:?}, k = {})", report.method, report.k).to_lowercase());
    y_axis(&mut out, max, LEFT, "end", "kW / kWh");
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let group = plot_w / 5.0;
    let bar = group * 0.35;
    for (i, name) in DesignVariables::NAMES.iter().enumerate() {
        let x0 = LEFT + group * i as f64 + group * 0.15;
        let mut bars = vec![(repr[i], "#3b75af")];
        if let Some(r) = reference {
            bars.push((r[i], "#aaaaaa"));
        }
        for (b, (v, color)) in bars.into_iter().enumerate() {
            let h = plot_h * v / max;
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{bar:.1}" height="{h:.1}" fill="{color}"/>"#,
                x0 + b as f64 * bar,
                H - BOTTOM - h
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{name}</text>"#,
            x0 + bar,
            H - BOTTOM + 18.0
        );
    }
    legend(&mut out, &[("representative", "#3b75af"), ("reference", "#aaaaaa")][..1 + reference.is_some() as usize]);
    out.push_str("</svg>\n");
    out
}

fn legend(out: &mut String, items: &[(&str, &str)]) {
    for (i, (label, color)) in items.iter().enumerate() {
        let x = LEFT + 10.0 + 150.0 * i as f64;
        let y = H - 14.0;
        let _ = writeln!(out, r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{color}"/>"#, y - 9.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{y:.1}">{}</text>"#, x + 14.0, escape(label));
    }
}

/// Total cost (left axis) and cost shares (right axis) over the grid
/// fraction.
pub fn sweep_line_chart(sweep: &SweepResult) -> String {
    let mut pts: Vec<(f64, f64, f64, f64)> = sweep
        .rows
        .iter()
        .filter_map(|row| {
            let r = row.report.as_ref()?;
            let (c, o) = r.costs.map_or((0.0, 0.0), |c| (c.capex_share, c.opex_share));
            Some((row.fraction, r.total_cost(), c, o))
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xmax = nice_max(pts.iter().map(|p| p.0).fold(0.0, f64::max));
    let ymax = nice_max(pts.iter().map(|p| p.1).fold(0.0, f64::max));
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + plot_w * x / xmax;
    let sy = |y: f64, max: f64| H - BOTTOM - plot_h * y / max;

    let mut out = String::new();
    header(&mut out, "Grid connection sweep");
    y_axis(&mut out, ymax, LEFT, "end", "total cost (EUR/a)");
    y_axis(&mut out, 1.0, W - RIGHT, "start", "cost share");
    for i in 0..=4 {
        let x = xmax * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.0}%</text>"#,
            sx(x),
            H - BOTTOM + 18.0,
            100.0 * x
        );
    }
    let series: [(&str, &str, Box<dyn Fn(&(f64, f64, f64, f64)) -> f64>); 3] = [
        ("total cost", "#3b75af", Box::new(|p| sy(p.1, ymax))),
        ("capital share", "#d9822b", Box::new(|p| sy(p.2, 1.0))),
        ("operating share", "#4c9a52", Box::new(|p| sy(p.3, 1.0))),
    ];
    for (_, color, y) in &series {
        let path: Vec<String> = pts.iter().map(|p| format!("{:.1},{:.1}", sx(p.0), y(p))).collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for p in &pts {
            let _ = writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, sx(p.0), y(p));
        }
    }
    let items: Vec<(&str, &str)> = series.iter().map(|(l, c, _)| (*l, *c)).collect();
    legend(&mut out, &items);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_axis_limits() {
        assert_eq!(nice_max(0.0), 1.0);
        assert_eq!(nice_max(3.2), 5.0);
        assert_eq!(nice_max(17.0), 20.0);
        assert_eq!(nice_max(100.0), 100.0);
        assert_eq!(nice_max(1.2), 2.0);
    }

    #[test]
    fn ticks() {
        assert_eq!(fmt_tick(0.0), "0");
        assert_eq!(fmt_tick(2.5), "2.50");
        assert_eq!(fmt_tick(200000.0), "2.0e5");
    }
}

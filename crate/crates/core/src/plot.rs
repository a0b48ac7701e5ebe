//! Static SVG charts of performance curves: one panel per (metric, task),
//! one polyline per strategy (mean over runs), dashed lines at the pre- and
//! post-acquisition anchors.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::io::CurveRow;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939",
];

struct Panel {
    title: String,
    /// strategy -> b bits -> (b, sum of values, run count)
    series: BTreeMap<String, BTreeMap<u64, (f64, f64, usize)>>,
    m_pre: f64,
    m_post: f64,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(rows: &[CurveRow]) -> String {
    let mut panels: BTreeMap<(String, String), Panel> = BTreeMap::new();
    for r in rows {
        let panel = panels
            .entry((r.metric.clone(), r.task.clone()))
            .or_insert_with(|| Panel {
                title: format!("{} / {}", r.metric, r.task),
                series: BTreeMap::new(),
                m_pre: r.m_pre,
                m_post: r.m_post,
            });
        let point = panel
            .series
            .entry(r.strategy.clone())
            .or_default()
            .entry(r.b.to_bits())
            .or_insert((r.b, 0.0, 0));
        point.1 += r.value;
        point.2 += 1;
    }
    let panels: Vec<Panel> = if panels.is_empty() {
        vec![Panel {
            title: "no curves".into(),
            series: BTreeMap::new(),
            m_pre: f64::NAN,
            m_post: f64::NAN,
        }]
    } else {
        panels.into_values().collect()
    };

    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, panel) in panels.iter().enumerate() {
        draw_panel(&mut svg, panel, PANEL_HEIGHT * i as f64);
    }
    svg.push_str("</svg>\n");
    svg
}

fn draw_panel(svg: &mut String, panel: &Panel, y0: f64) {
    let (x_lo, x_hi) = (LEFT, WIDTH - RIGHT);
    let (y_top, y_bot) = (y0 + TOP, y0 + PANEL_HEIGHT - BOTTOM);

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in [panel.m_pre, panel.m_post].into_iter().filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    for points in panel.series.values() {
        for &(_, sum, n) in points.values() {
            let v = sum / n as f64;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        lo -= 0.05;
        hi += 0.05;
    } else {
        let pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    let sx = |b: f64| x_lo + b * (x_hi - x_lo);
    let sy = |v: f64| y_bot - (v - lo) / (hi - lo) * (y_bot - y_top);

    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
        (x_lo + x_hi) / 2.0,
        y0 + TOP - 15.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{x_lo:.2},{y_top:.2} V{y_bot:.2} H{x_hi:.2}" fill="none" stroke="black"/>"#
    );
    for t in 0..=4 {
        let b = t as f64 / 4.0;
        let x = sx(b);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y_bot:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}%</text>"#,
            y_bot + 5.0,
            y_bot + 18.0,
            t * 25
        );
        let v = lo + (hi - lo) * b;
        let y = sy(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x_lo:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            x_lo - 5.0,
            x_lo - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">budget fraction</text>"#,
        (x_lo + x_hi) / 2.0,
        y_bot + 36.0
    );

    for (label, v) in [("pre", panel.m_pre), ("post", panel.m_post)] {
        if v.is_finite() {
            let y = sy(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{x_lo:.2}" y1="{y:.2}" x2="{x_hi:.2}" y2="{y:.2}" stroke="#444444" stroke-dasharray="6 4"/><text x="{:.2}" y="{:.2}" fill="#444444">{label}</text>"##,
                x_hi + 4.0,
                y + 4.0
            );
        }
    }

    for (i, (strategy, points)) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = points.values().map(|&(b, sum, n)| (b, sum / n as f64)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let coords: Vec<String> = pts
            .iter()
            .map(|&(b, v)| format!("{:.2},{:.2}", sx(b), sy(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
        let ly = y_top + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x_hi + 40.0,
            x_hi + 60.0,
            x_hi + 64.0,
            ly + 4.0,
            escape(strategy)
        );
    }
}

//! Standalone SVG overlay of EXIT curves.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn x_px(eps: f64) -> f64 {
    LEFT + eps * (WIDTH - LEFT - RIGHT)
}

fn y_px(h: f64) -> f64 {
    HEIGHT - BOTTOM - h * (HEIGHT - TOP - BOTTOM)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Curves `h(ε)` on the unit square with dashed vertical lines at each
/// capacity `1 − R`.
pub fn overlay(series: &[Series<'_>], capacities: &[f64]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (x_px(0.0), x_px(1.0), y_px(0.0), y_px(1.0));
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (gx, gy) = (x_px(t), y_px(t));
        let _ = writeln!(s, r#"<line x1="{gx:.2}" y1="{y0}" x2="{gx:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{t:.2}</text>"#, y0 + 18.0);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{gy:.2}" x2="{x0}" y2="{gy:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{t:.2}</text>"#, x0 - 8.0, gy + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">erasure probability ε</text>"#, (x0 + x1) / 2.0, HEIGHT - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">EXIT h(ε)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    for &c in capacities {
        let cx = x_px(c.clamp(0.0, 1.0));
        let _ = writeln!(s, r##"<line x1="{cx:.2}" y1="{y0}" x2="{cx:.2}" y2="{y1}" stroke="#555" stroke-dasharray="6,4"/>"##);
        let _ = writeln!(s, r##"<text x="{:.2}" y="{:.2}" fill="#555">1−R={c:.4}</text>"##, cx + 3.0, y1 + 12.0);
    }
    for (k, curve) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = curve
            .points
            .iter()
            .map(|&(e, h)| format!("{:.2},{:.2}", x_px(e), y_px(h.clamp(0.0, 1.0))))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = TOP + 20.0 + 18.0 * k as f64;
        let lx = x1 + 15.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(curve.label));
    }
    s.push_str("</svg>\n");
    s
}

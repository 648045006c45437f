//! Minimal line charts: log intensity axis, log or linear value axis.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;

pub fn line_chart(title: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| *x > 0.0 && y.is_finite()).collect();
    let log_y = !pts.is_empty() && pts.iter().all(|p| p.1 > 0.0);
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(ty(y));
        y1 = y1.max(ty(y));
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-300 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for d in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = sx(d as f64);
        let _ =
            writeln!(s, r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="black"/>"#, H - PAD, H - PAD + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">1e{d}</text>"#, H - PAD + 18.0);
    }
    for (v, label) in y_ticks(y0, y1, log_y) {
        let y = sy(v);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.1}" x2="{PAD}" y2="{y:.1}" stroke="black"/>"#, PAD - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#, PAD - 7.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">intensity (W/cm^2)</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x.log10()), sy(ty(y)))).collect();
    let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, path.join(" "));
    s.push_str("</svg>\n");
    s
}

fn y_ticks(y0: f64, y1: f64, log_y: bool) -> Vec<(f64, String)> {
    if log_y {
        let (a, b) = (y0.ceil() as i32, y1.floor() as i32);
        let step = ((b - a) / 8).max(1);
        return (a..=b).step_by(step as usize).map(|d| (d as f64, format!("1e{d}"))).collect();
    }
    (0..=4)
        .map(|j| {
            let v = y0 + (y1 - y0) * j as f64 / 4.0;
            (v, format!("{v:.3e}"))
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_positive_and_signed_data() {
        let log = line_chart("a<b", "S", &[(1e13, 1e-3), (1e14, 1e-1), (1e15, 1.0)]);
        assert!(log.contains("a&lt;b") && log.contains("1e14") && log.contains("polyline"));
        let lin = line_chart("p", "P", &[(1e13, -0.1), (1e14, 0.5)]);
        assert!(lin.contains("polyline") && lin.ends_with("</svg>\n"));
        assert!(line_chart("empty", "P", &[]).contains("</svg>"));
    }
}

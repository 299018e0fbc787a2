//! Line-record logging and the cosmetic SVG histogram writer.

use framesim_core::corpus::HistogramBin;
use std::fmt::Write as _;

pub fn log(quiet: bool, level: &str, msg: &str) {
    if quiet && level != "error" {
        return;
    }
    eprintln!(
        "{}",
        serde_json::json!({ "level": level, "msg": msg })
    );
}

/// Renders equal-width bins as a static bar chart. CSV stays the canonical
/// output; this is a convenience display.
pub fn render_histogram(bins: &[HistogramBin], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const MARGIN: f64 = 40.0;
    let plot_w = W - 2.0 * MARGIN;
    let plot_h = H - 2.0 * MARGIN;
    let max_count = bins.iter().map(|b| b.count).max().unwrap_or(1).max(1) as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>"#,
        W / 2.0
    );
    for (i, bin) in bins.iter().enumerate() {
        let bar_w = plot_w / bins.len() as f64;
        let bar_h = plot_h * bin.count as f64 / max_count;
        let x = MARGIN + i as f64 * bar_w;
        let y = H - MARGIN - bar_h;
        let _ = writeln!(
            svg,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{bar_h:.2}" fill="#4a7fb5" stroke="white"/>"##,
            bar_w
        );
    }
    // Axis line and the three canonical x labels.
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - MARGIN,
        W - MARGIN,
        H - MARGIN
    );
    for (frac, label) in [(0.0, "0.0"), (0.5, "0.5"), (1.0, "1.0")] {
        let x = MARGIN + plot_w * frac;
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{label}</text>"#,
            H - MARGIN + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="12">{}</text>"#,
        MARGIN - 6.0,
        MARGIN + 4.0,
        max_count as usize
    );
    svg.push_str("</svg>\n");
    svg
}

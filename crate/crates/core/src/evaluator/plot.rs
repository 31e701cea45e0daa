//! Minimal standalone SVG line plots.

use std::fmt::Write as _;

const W: f64 = 480.0;
const H: f64 = 360.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const MAX_POINTS: usize = 2000;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn thin(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let step = points.len().div_ceil(MAX_POINTS);
    let mut out: Vec<(f64, f64)> = points.iter().step_by(step).copied().collect();
    if out.last() != points.last() {
        out.push(*points.last().unwrap());
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders series into an SVG document with fixed axis ranges.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64), series: &[Series]) -> String {
    let (x0, x1) = x_range;
    let (y0, y1) = y_range;
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0).max(f64::MIN_POSITIVE) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0).max(f64::MIN_POSITIVE) * (H - 2.0 * MARGIN);
    let mut svg = String::new();
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    )
    .unwrap();
    for i in 0..=4 {
        let f = f64::from(i) / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle" font-size="10">{}</text>"#,
            sx(xv),
            H - MARGIN + 14.0,
            (xv * 100.0).round() / 100.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
            MARGIN - 4.0,
            sy(yv) + 3.0,
            (yv * 100.0).round() / 100.0
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="14" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    )
    .unwrap();
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = thin(&s.points)
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
        let ly = MARGIN + 14.0 + 14.0 * i as f64;
        writeln!(
            svg,
            r#"<text x="{}" y="{ly}" font-size="10" fill="{color}">{}</text>"#,
            W - MARGIN - 110.0,
            escape(s.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_and_thinned() {
        let pts: Vec<(f64, f64)> = (0..10_000).map(|i| (i as f64 / 9999.0, (i as f64 / 9999.0).sqrt())).collect();
        let svg = line_plot("ROC <a&b>", "FPR", "TPR", (0.0, 1.0), (0.0, 1.0), &[Series { label: "x", points: pts }]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("ROC &lt;a&amp;b&gt;"));
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert!(poly.matches(',').count() <= MAX_POINTS + 1);
    }
}

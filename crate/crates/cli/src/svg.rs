//! Static SVG line chart of a Murphy diagram.

use std::fmt::Write;

use orlicz::murphy::MurphyCurve;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1b6ca8", "#d1495b", "#edae49", "#00798c", "#6a4c93", "#30343f"];

pub fn murphy_svg(curve: &MurphyCurve<f64>) -> String {
    let zs = &curve.thresholds;
    let (z0, z1) = (zs[0], *zs.last().unwrap());
    let ymax = curve
        .series
        .iter()
        .flat_map(|s| s.mean_scores.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let span = if z1 > z0 { z1 - z0 } else { 1.0 };
    let px = |z: f64| MARGIN + (z - z0) / span * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - v / ymax * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">z</text>"#, WIDTH / 2.0, HEIGHT - 20.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">expected score</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (v, y) in [(z0, bottom), (z1, bottom)] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.3}</text>"#, px(v), y + 16.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{ymax:.3e}</text>"#, left - 4.0, top + 4.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">0</text>"#, left - 4.0, bottom);

    for (i, series) in curve.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = zs
            .iter()
            .zip(&series.mean_scores)
            .filter(|(_, v)| v.is_finite())
            .map(|(&z, &v)| format!("{:.2},{:.2}", px(z), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        let ly = top + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{color}" text-anchor="end">{}</text>"#,
            right,
            series.forecaster
        );
    }
    s.push_str("</svg>\n");
    s
}

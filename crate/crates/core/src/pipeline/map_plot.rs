//! Static SVG rendering of a classification map.

use std::fmt::Write as _;

use crate::classify::ClassificationMap;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Scatter of normalized features coloured by label, with centroids drawn as crosses.
pub fn render_svg(map: &ClassificationMap) -> String {
    let coords = map
        .points
        .iter()
        .map(|p| p.normalized)
        .chain(map.centroids.iter().map(|c| c.position));
    let (mut x_min, mut x_max, mut y_min, mut y_max) = (-1.0f64, 1.0f64, -1.0f64, 1.0f64);
    for [x, y] in coords {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    let pad_x = 0.05 * (x_max - x_min);
    let pad_y = 0.05 * (y_max - y_min);
    let (x_min, x_max, y_min, y_max) = (x_min - pad_x, x_max + pad_x, y_min - pad_y, y_max + pad_y);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;
    let colour = |label: &str| {
        let idx = map
            .centroids
            .iter()
            .position(|c| c.label == label)
            .unwrap_or(map.centroids.len());
        PALETTE[idx % PALETTE.len()]
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for i in 0..=4 {
        let fx = x_min + (x_max - x_min) * i as f64 / 4.0;
        let fy = y_min + (y_max - y_min) * i as f64 / 4.0;
        let (px, py) = (sx(fx), sy(fy));
        let bottom = MARGIN_TOP + plot_h;
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{fx:.2}</text>"#,
            bottom + 5.0,
            bottom + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.2}</text>"#,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{} (z-score)</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        map.features[0]
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{} (z-score)</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        map.features[1]
    );

    for p in &map.points {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.6"/>"#,
            sx(p.normalized[0]),
            sy(p.normalized[1]),
            colour(&p.label)
        );
    }
    for c in &map.centroids {
        let (cx, cy) = (sx(c.position[0]), sy(c.position[1]));
        let _ = writeln!(
            svg,
            r#"<path d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="{}" stroke-width="3"/>"#,
            cx - 7.0,
            cy - 7.0,
            cx + 7.0,
            cy + 7.0,
            cx - 7.0,
            cy + 7.0,
            cx + 7.0,
            cy - 7.0,
            colour(&c.label)
        );
    }

    let legend_x = WIDTH - MARGIN_RIGHT + 20.0;
    for (i, c) in map.centroids.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<circle cx="{legend_x:.2}" cy="{y:.2}" r="5" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            colour(&c.label),
            legend_x + 12.0,
            y + 4.0,
            xml_escape(&c.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

//! Deterministic SVG rendering for persistence diagrams and Betti curves.
//! No timestamps or run metadata are emitted, so identical inputs give
//! byte-identical plots.

use trajtopo::homology::PersistenceDiagram;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 70.0;
const DIM_COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];
const DIM_NAMES: [&str; 3] = ["H0", "H1", "H2"];

fn header(width: f64, height: f64) -> String {
    format!(
        r##"<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">
<rect width="{width}" height="{height}" fill="white"/>
"##
    )
}

fn axis_label(x: f64, y: f64, text: &str, rotate: bool) -> String {
    let transform = if rotate {
        format!(r##" transform="rotate(-90 {x:.2} {y:.2})""##)
    } else {
        String::new()
    };
    format!(
        r##"<text x="{x:.2}" y="{y:.2}" font-family="monospace" font-size="16" text-anchor="middle"{transform}>{text}</text>
"##
    )
}

fn glyph(dim: u8, x: f64, y: f64) -> String {
    let color = DIM_COLORS[dim as usize % 3];
    match dim {
        0 => format!(r##"<circle cx="{x:.3}" cy="{y:.3}" r="4.5" fill="{color}" fill-opacity="0.75"/>"##),
        1 => format!(
            r##"<rect x="{:.3}" y="{:.3}" width="8" height="8" fill="{color}" fill-opacity="0.75"/>"##,
            x - 4.0,
            y - 4.0
        ),
        _ => format!(
            r##"<path d="M {x:.3} {:.3} L {:.3} {:.3} L {:.3} {:.3} Z" fill="{color}" fill-opacity="0.75"/>"##,
            y - 5.0,
            x - 5.0,
            y + 4.0,
            x + 5.0,
            y + 4.0
        ),
    }
}

/// Birth on x, death on y, the diagonal, one glyph shape per dimension;
/// essential classes are drawn on a dashed "infinity" line above the
/// finite range.
pub fn diagram_svg(diagram: &PersistenceDiagram) -> String {
    let finite_max = diagram
        .intervals
        .iter()
        .flat_map(|iv| [iv.birth, if iv.death.is_finite() { iv.death } else { iv.birth }])
        .fold(0.0_f64, f64::max);
    let scale_max = if finite_max > 0.0 { finite_max * 1.1 } else { 1.0 };
    let inf_y = scale_max * 1.08;
    let top = scale_max * 1.16;

    let to_x = |v: f64| MARGIN + v / top * (SIZE - 2.0 * MARGIN);
    let to_y = |v: f64| SIZE - MARGIN - v / top * (SIZE - 2.0 * MARGIN);

    let mut svg = header(SIZE, SIZE);
    // frame and diagonal
    svg.push_str(&format!(
        r##"<rect x="{m:.2}" y="{m:.2}" width="{w:.2}" height="{w:.2}" fill="none" stroke="black"/>
<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="#888888"/>
"##,
        m = MARGIN,
        w = SIZE - 2.0 * MARGIN,
        x0 = to_x(0.0),
        y0 = to_y(0.0),
        x1 = to_x(top),
        y1 = to_y(top),
    ));
    // infinity line
    svg.push_str(&format!(
        r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#aaaaaa" stroke-dasharray="6 4"/>
<text x="{lx:.2}" y="{ly:.2}" font-family="monospace" font-size="15">inf</text>
"##,
        x0 = to_x(0.0),
        x1 = to_x(top),
        y = to_y(inf_y),
        lx = to_x(0.0) - 36.0,
        ly = to_y(inf_y) + 5.0,
    ));
    svg.push_str(&axis_label(SIZE / 2.0, SIZE - 18.0, "birth", false));
    svg.push_str(&axis_label(20.0, SIZE / 2.0, "death", true));

    for iv in &diagram.intervals {
        let death = if iv.death.is_finite() { iv.death } else { inf_y };
        svg.push_str(&glyph(iv.dim, to_x(iv.birth), to_y(death)));
        svg.push('\n');
    }

    // legend
    for dim in 0..3u8 {
        let y = MARGIN + 8.0 + 24.0 * f64::from(dim);
        svg.push_str(&glyph(dim, MARGIN + 14.0, y));
        svg.push_str(&format!(
            r##"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="15">{}</text>
"##,
            MARGIN + 28.0,
            y + 5.0,
            DIM_NAMES[dim as usize]
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Step plot of feature count against scale.
pub fn betti_svg(points: &[(f64, usize)]) -> String {
    let width = 760.0;
    let height = 420.0;
    let max_eps = points.iter().map(|(e, _)| *e).fold(0.0_f64, f64::max).max(1e-12);
    let max_count = points.iter().map(|(_, c)| *c).max().unwrap_or(0).max(1) as f64;

    let to_x = |e: f64| MARGIN + e / max_eps * (width - 2.0 * MARGIN);
    let to_y = |c: f64| height - MARGIN + c / max_count * (2.0 * MARGIN - height);

    let mut svg = header(width, height);
    svg.push_str(&format!(
        r##"<rect x="{m:.2}" y="{m:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="black"/>
"##,
        m = MARGIN,
        w = width - 2.0 * MARGIN,
        h = height - 2.0 * MARGIN,
    ));
    svg.push_str(&axis_label(width / 2.0, height - 18.0, "eps", false));
    svg.push_str(&axis_label(20.0, height / 2.0, "count", true));

    if !points.is_empty() {
        let mut path = String::from("M ");
        for (i, (eps, count)) in points.iter().enumerate() {
            let x = to_x(*eps);
            let y = to_y(*count as f64);
            if i == 0 {
                path.push_str(&format!("{x:.3} {y:.3}"));
            } else {
                // horizontal-then-vertical step
                path.push_str(&format!(" L {x:.3} {:.3} L {x:.3} {y:.3}", to_y(points[i - 1].1 as f64)));
            }
        }
        svg.push_str(&format!(
            r##"<path d="{path}" fill="none" stroke="{}" stroke-width="2"/>
"##,
            DIM_COLORS[0]
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

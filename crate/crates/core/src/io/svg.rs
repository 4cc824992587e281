use std::fmt::Write as _;

use crate::appetite::{HeatMap, SeverityBand};

use super::{FORMAT_MARKER, FORMAT_VERSION};

const CELL_W: usize = 80;
const CELL_H: usize = 56;
const LEFT: usize = 70;
const TOP: usize = 50;
const BOTTOM: usize = 60;
const RIGHT: usize = 20;
const MARKER_STEP: usize = 9;
const MARKERS_PER_ROW: usize = 8;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the heat map as an SVG grid: asset value rows (5 at the top),
/// combined-likelihood columns 1-10, cells filled by band, one marker per
/// entry and an entry count in occupied cells. Identical input gives
/// identical bytes.
pub fn render_heatmap_svg(map: &HeatMap) -> Vec<u8> {
    let rows = map.rows.len();
    let cols = map.rows.first().map_or(0, Vec::len);
    let width = LEFT + cols * CELL_W + RIGHT;
    let height = TOP + rows * CELL_H + BOTTOM;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(svg, "<!-- {FORMAT_MARKER} {FORMAT_VERSION} -->");
    let title = format!(
        "Risk register heat map (appetite {}, {} entries)",
        map.appetite,
        map.entry_count()
    );
    let _ = writeln!(svg, "<title>{}</title>", escape(&title));
    let _ = writeln!(
        svg,
        "<text x=\"{LEFT}\" y=\"30\" font-size=\"16\" font-weight=\"bold\">{}</text>",
        escape(&title)
    );

    for (r, row) in map.rows.iter().rev().enumerate() {
        let y = TOP + r * CELL_H;
        if let Some(first) = row.first() {
            let _ = writeln!(
                svg,
                "<text class=\"row-label\" x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"end\">A={}</text>",
                LEFT - 10,
                y + CELL_H / 2 + 5,
                first.asset_value
            );
        }
        for (c, cell) in row.iter().enumerate() {
            let x = LEFT + c * CELL_W;
            let _ = writeln!(
                svg,
                "<rect class=\"cell\" x=\"{x}\" y=\"{y}\" width=\"{CELL_W}\" height=\"{CELL_H}\" fill=\"{}\" stroke=\"#ffffff\" stroke-width=\"2\" data-asset-value=\"{}\" data-column=\"{}\" data-band=\"{}\" data-nominal-risk=\"{}\"/>",
                cell.band.fill(),
                cell.asset_value,
                cell.column,
                cell.band,
                cell.nominal_risk
            );
            if cell.entries.is_empty() {
                continue;
            }
            let _ = writeln!(
                svg,
                "<text class=\"count\" x=\"{}\" y=\"{}\" font-size=\"13\" font-weight=\"bold\">{}</text>",
                x + 6,
                y + 17,
                cell.entries.len()
            );
            for (i, id) in cell.entries.iter().enumerate() {
                let cx = x + 9 + (i % MARKERS_PER_ROW) * MARKER_STEP;
                let cy = y + 28 + (i / MARKERS_PER_ROW) * MARKER_STEP;
                let _ = writeln!(
                    svg,
                    "<circle class=\"marker\" cx=\"{cx}\" cy=\"{cy}\" r=\"3\" fill=\"#222222\" data-entry=\"{id}\"><title>entry {id}</title></circle>"
                );
            }
        }
    }

    let axis_y = TOP + rows * CELL_H;
    for c in 0..cols {
        let _ = writeln!(
            svg,
            "<text class=\"col-label\" x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            LEFT + c * CELL_W + CELL_W / 2,
            axis_y + 18,
            c + 1
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">combined likelihood ceil(T x V / 10)</text>",
        LEFT + cols * CELL_W / 2,
        axis_y + 36
    );

    let mut lx = LEFT;
    for band in SeverityBand::ALL {
        let _ = writeln!(
            svg,
            "<rect class=\"legend\" x=\"{lx}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/><text x=\"{}\" y=\"{}\" font-size=\"12\">{band}</text>",
            axis_y + 44,
            band.fill(),
            lx + 16,
            axis_y + 54
        );
        lx += 90;
    }

    svg.push_str("</svg>\n");
    svg.into_bytes()
}

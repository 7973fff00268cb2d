//! Floorplan drawings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::device::{BlockType, Device};
use crate::placement::PlacedBlock;

const CELL_W: u32 = 6;
const CELL_H: u32 = 3;
const MARGIN: u32 = 4;

fn fill(t: BlockType) -> (&'static str, &'static str) {
    // (column strip, occupied site)
    match t {
        BlockType::Dsp => ("#dbe8f6", "#2f6db5"),
        BlockType::Bram => ("#f7e6d0", "#c2731f"),
        BlockType::Uram => ("#e3f1df", "#3c8f36"),
    }
}

/// Cell-corner convex hull of a set of sites, in grid units.
fn hull(cells: &[(u32, u32)]) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = cells
        .iter()
        .flat_map(|&(x, y)| {
            let (x, y) = (x as i64, y as i64);
            [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)]
        })
        .collect();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Draws columns as strips, one filled rectangle per placed block, the
/// bounding box of every unit and, optionally, the hull of one unit.
pub fn floorplan_svg(device: &Device, blocks: &[PlacedBlock], highlight: Option<u32>) -> String {
    let width = (device.xmax + 1) * CELL_W + 2 * MARGIN;
    let height = device.ymax * CELL_H + 2 * MARGIN;
    // grid row 0 at the bottom
    let px = |x: u32| MARGIN + x * CELL_W;
    let py = |y: u32| MARGIN + (device.ymax - y) * CELL_H;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(out, r#"<title>{}</title>"#, device.name).unwrap();
    writeln!(out, r##"<rect class="background" x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>"##).unwrap();

    let mut columns: Vec<_> = device.columns.iter().collect();
    columns.sort_by_key(|c| (c.x, c.block_type));
    for c in columns {
        let (strip, _) = fill(c.block_type);
        writeln!(
            out,
            r#"<rect class="column {}" x="{}" y="{}" width="{}" height="{}" fill="{strip}"/>"#,
            c.block_type,
            px(c.x),
            py(device.ymax),
            CELL_W,
            device.ymax * CELL_H
        )
        .unwrap();
    }

    let mut units: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    for b in blocks {
        let (_, site) = fill(b.block_type);
        writeln!(
            out,
            r#"<rect class="site {}" x="{}" y="{}" width="{}" height="{}" fill="{site}"><title>{} {}</title></rect>"#,
            b.block_type,
            px(b.x),
            py(b.y + 1),
            CELL_W,
            CELL_H,
            b.block_type,
            b.block_id
        )
        .unwrap();
        if let Some(u) = b.unit {
            units.entry(u).or_default().push((b.x, b.y));
        }
    }

    for (u, cells) in &units {
        let x0 = cells.iter().map(|c| c.0).min().unwrap_or(0);
        let x1 = cells.iter().map(|c| c.0).max().unwrap_or(0) + 1;
        let y0 = cells.iter().map(|c| c.1).min().unwrap_or(0);
        let y1 = cells.iter().map(|c| c.1).max().unwrap_or(0) + 1;
        writeln!(
            out,
            r##"<rect class="unit" data-unit="{u}" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444444" stroke-width="0.6"/>"##,
            px(x0),
            py(y1),
            (x1 - x0) * CELL_W,
            (y1 - y0) * CELL_H
        )
        .unwrap();
    }

    if let Some(cells) = highlight.and_then(|u| units.get(&u)) {
        let points: Vec<String> = hull(cells)
            .into_iter()
            .map(|(x, y)| {
                format!(
                    "{},{}",
                    MARGIN as i64 + x * CELL_W as i64,
                    MARGIN as i64 + (device.ymax as i64 - y) * CELL_H as i64
                )
            })
            .collect();
        writeln!(
            out,
            r##"<polygon class="highlight" data-unit="{}" points="{}" fill="#ffd70055" stroke="#d01010" stroke-width="1.2"/>"##,
            highlight.unwrap_or_default(),
            points.join(" ")
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

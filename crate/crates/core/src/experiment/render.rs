//! Deterministic SVG renderings of archives and phenotypes.

use std::fmt::Write;

use crate::encodings::EncodingTag;
use crate::error::{Error, Result};
use crate::phenotype::{HeightGrid, MAX_LEVEL, METERS_PER_LEVEL};
use crate::qd::ArchiveSnapshot;

const TILE: usize = 20;
const MARGIN: usize = 40;
pub const EMPTY_FILL: &str = "#ffffff";

/// Shades for levels 0..=3, lightest first.
pub const LEVEL_SHADES: [&str; 4] = ["#f7f7f7", "#bdbdbd", "#737373", "#252525"];

/// One color per encoding, indexed by [`EncodingTag::index`].
pub const ENCODING_COLORS: [&str; 5] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"];

/// Viridis control points, low to high.
const FITNESS_RAMP: [(u8, u8, u8); 5] = [
    (0x44, 0x01, 0x54),
    (0x3b, 0x52, 0x8b),
    (0x21, 0x90, 0x8d),
    (0x5d, 0xc9, 0x63),
    (0xfd, 0xe7, 0x25),
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ColorMode {
    #[default]
    Fitness,
    Encoding,
}

pub fn fitness_color(f: f64) -> String {
    let x = if f.is_finite() { f.clamp(0.0, 1.0) } else { 0.0 };
    let pos = x * (FITNESS_RAMP.len() - 1) as f64;
    let i = (pos.floor() as usize).min(FITNESS_RAMP.len() - 2);
    let t = pos - i as f64;
    let (a, b) = (FITNESS_RAMP[i], FITNESS_RAMP[i + 1]);
    let lerp = |p: u8, q: u8| (p as f64 + (q as f64 - p as f64) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(a.0, b.0), lerp(a.1, b.1), lerp(a.2, b.2))
}

fn tile(out: &mut String, x: usize, y: usize, fill: &str, title: Option<&str>) {
    match title {
        Some(t) => writeln!(
            out,
            r##"<rect x="{x}" y="{y}" width="{TILE}" height="{TILE}" fill="{fill}" stroke="#cccccc"><title>{t}</title></rect>"##
        ),
        None => writeln!(
            out,
            r##"<rect x="{x}" y="{y}" width="{TILE}" height="{TILE}" fill="{fill}" stroke="#cccccc"/>"##
        ),
    }
    .expect("write to string");
}

/// Area bins run left to right, building-count bins bottom to top, so bin
/// `(0, 0)` sits in the bottom-left corner.
pub fn render_archive(snapshot: &ArchiveSnapshot, mode: ColorMode) -> Result<String> {
    let cols = snapshot.area_edges.len().saturating_sub(1);
    let rows = snapshot.count_edges.len().saturating_sub(1);
    if cols == 0 || rows == 0 {
        return Err(Error::Parse {
            location: "archive edges".into(),
            message: "need at least two edges per axis".into(),
        });
    }
    let mut fills = vec![None; cols * rows];
    for (i, e) in snapshot.elites.iter().enumerate() {
        if e.area_bin >= cols || e.count_bin >= rows {
            return Err(Error::Parse {
                location: format!("elites[{i}]"),
                message: format!("bin ({}, {}) outside {cols} x {rows} archive", e.area_bin, e.count_bin),
            });
        }
        let fill = match mode {
            ColorMode::Fitness => fitness_color(e.elite.fitness),
            ColorMode::Encoding => ENCODING_COLORS[e.elite.encoding_tag.index()].to_string(),
        };
        let title = format!("{} fitness {:.4}", e.elite.encoding_tag, e.elite.fitness);
        fills[e.count_bin * cols + e.area_bin] = Some((fill, title));
    }

    let width = cols * TILE + 2 * MARGIN;
    let legend = if mode == ColorMode::Encoding { 5 * TILE } else { 0 };
    let height = rows * TILE + 2 * MARGIN + legend;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(out, r#"<g id="tiles">"#).unwrap();
    for cb in 0..rows {
        for ab in 0..cols {
            let x = MARGIN + ab * TILE;
            let y = MARGIN + (rows - 1 - cb) * TILE;
            match &fills[cb * cols + ab] {
                Some((fill, title)) => tile(&mut out, x, y, fill, Some(title)),
                None => tile(&mut out, x, y, EMPTY_FILL, None),
            }
        }
    }
    writeln!(out, "</g>").unwrap();
    let bottom = MARGIN + rows * TILE;
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">built area</text>"#,
        MARGIN + cols * TILE / 2,
        bottom + 25
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="12" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 12 {})">buildings</text>"#,
        MARGIN + rows * TILE / 2,
        MARGIN + rows * TILE / 2
    )
    .unwrap();
    if mode == ColorMode::Encoding {
        writeln!(out, r#"<g id="legend">"#).unwrap();
        for tag in EncodingTag::ALL {
            let y = bottom + MARGIN + tag.index() * TILE;
            writeln!(
                out,
                r#"<rect x="{MARGIN}" y="{y}" width="12" height="12" fill="{}"/><text x="{}" y="{}" font-size="12">{tag}</text>"#,
                ENCODING_COLORS[tag.index()],
                MARGIN + 18,
                y + 11
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

/// Top-down view, row 0 at the top, one shade per height level.
pub fn render_phenotype(grid: &HeightGrid) -> String {
    let (rows, cols) = (grid.rows(), grid.cols());
    let width = cols * TILE + 2 * MARGIN + 80;
    let height = (rows * TILE).max(4 * TILE) + 2 * MARGIN;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(out, r#"<g id="tiles">"#).unwrap();
    for r in 0..rows {
        for c in 0..cols {
            let level = grid.get(r, c) as usize;
            tile(&mut out, MARGIN + c * TILE, MARGIN + r * TILE, LEVEL_SHADES[level], None);
        }
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, r#"<g id="legend">"#).unwrap();
    let lx = 2 * MARGIN + cols * TILE;
    for (level, shade) in LEVEL_SHADES.iter().enumerate().take(MAX_LEVEL as usize + 1) {
        let y = MARGIN + level * TILE;
        writeln!(
            out,
            r##"<rect x="{lx}" y="{y}" width="14" height="14" fill="{}" stroke="#999999"/><text x="{}" y="{}" font-size="12">{} m</text>"##,
            shade,
            lx + 20,
            y + 12,
            level * METERS_PER_LEVEL as usize
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, "</svg>").unwrap();
    out
}

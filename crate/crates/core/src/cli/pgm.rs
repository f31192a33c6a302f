//! Plain PGM (`P2`, maxval 1) for rasters, top row first.

use crate::error::{Error, Result};
use crate::level::BitGrid;

/// Largest raster side accepted by [`parse_pgm`].
pub const MAX_PGM_SIDE: usize = 1 << 15;

pub fn to_pgm(grid: &BitGrid) -> String {
    let n = grid.side();
    let mut out = format!("P2\n{n} {n}\n1\n");
    for j in (0..n).rev() {
        let row: Vec<&str> = (0..n).map(|i| if grid.get(i, j) { "1" } else { "0" }).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_pgm(text: &str) -> Result<BitGrid> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_ascii_whitespace);
    let mut next = |what: &str| tokens.next().ok_or_else(|| Error::Parse(format!("PGM ends before {what}")));
    if next("magic")? != "P2" {
        return Err(Error::Parse("not a plain PGM (P2)".into()));
    }
    let num = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad {what} {s:?}")))
    };
    let w = num(next("width")?, "width")?;
    let h = num(next("height")?, "height")?;
    if w != h || w == 0 || w > MAX_PGM_SIDE {
        return Err(Error::Parse(format!("raster must be square with side in 1..={MAX_PGM_SIDE}, got {w}x{h}")));
    }
    if w * h > text.len() {
        return Err(Error::Parse(format!("PGM too short for a {w}x{h} raster")));
    }
    if num(next("maxval")?, "maxval")? != 1 {
        return Err(Error::Parse("maxval must be 1".into()));
    }
    let mut grid = BitGrid::new(w);
    for r in 0..h {
        for i in 0..w {
            match next("pixel data")? {
                "0" => {}
                "1" => grid.set(i, h - 1 - r, true),
                s => return Err(Error::Parse(format!("pixel value {s:?} is not 0 or 1"))),
            }
        }
    }
    if tokens.next().is_some() {
        return Err(Error::Parse("trailing data after raster".into()));
    }
    Ok(grid)
}

use serde::{Deserialize, Serialize};

use crate::level::BitGrid;

/// Reference side from which axis rays are cast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RaySide {
    Bottom,
    Top,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FirstHit {
    /// `(column, row)` of the first retained cell on each ray that meets one.
    pub cells: Vec<(usize, usize)>,
    pub count: usize,
}

/// For each column (bottom/top) or row (left/right), the first retained cell
/// seen from the given side.
pub fn visible_first_hit(grid: &BitGrid, side: RaySide) -> FirstHit {
    let n = grid.side();
    let cells: Vec<(usize, usize)> = (0..n)
        .filter_map(|r| {
            let mut steps: Box<dyn Iterator<Item = usize>> = match side {
                RaySide::Bottom | RaySide::Left => Box::new(0..n),
                RaySide::Top | RaySide::Right => Box::new((0..n).rev()),
            };
            let cell = |s: usize| match side {
                RaySide::Bottom | RaySide::Top => (r, s),
                RaySide::Left | RaySide::Right => (s, r),
            };
            steps.find(|&s| {
                let (i, j) = cell(s);
                grid.get(i, j)
            })
            .map(cell)
        })
        .collect();
    FirstHit {
        count: cells.len(),
        cells,
    }
}

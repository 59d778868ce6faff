//! Generators for the tile structures used throughout the crate.

use crate::grid::{parse_tile_grid, TileStructure, MAX_DIM};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid family parameters: {0}")]
pub struct FamilyError(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Example1,
    Fig2,
    Prop2,
    Prop3,
    FiveTile,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Example1,
        Family::Fig2,
        Family::Prop2,
        Family::Prop3,
        Family::FiveTile,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Example1 => "example1",
            Family::Fig2 => "fig2",
            Family::Prop2 => "prop2",
            Family::Prop3 => "prop3",
            Family::FiveTile => "five-tile",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s || (s == "five_tile" && *f == Family::FiveTile))
            .ok_or_else(|| FamilyError(format!("unknown family '{s}'")))
    }
}

/// A family name plus its parameters. `m`/`n` are ignored by the fixed
/// structures; `t` is only read by `prop3`, whose grid is `m × m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub t: usize,
}

impl FamilySpec {
    pub fn generate(&self) -> Result<TileStructure, FamilyError> {
        match self.family {
            Family::Example1 => Ok(example1()),
            Family::Fig2 => Ok(fig2()),
            Family::Prop2 => prop2(self.m, self.n),
            Family::Prop3 => prop3(self.m, self.t),
            Family::FiveTile => five_tile(self.m, self.n),
        }
    }
}

fn fixed(text: &str) -> TileStructure {
    parse_tile_grid(text).expect("built-in grid is valid")
}

pub fn example1() -> TileStructure {
    fixed("4 4\n1 1 2 3\n6 4 6 3\n6 4 6 3\n5 4 2 5\n")
}

pub fn fig2() -> TileStructure {
    fixed("4 4\n1 1 2 2\n3 4 4 3\n5 4 4 5\n6 6 6 6\n")
}

fn check_mn(m: usize, n: usize) -> Result<(), FamilyError> {
    if m < 3 || m > n {
        return Err(FamilyError(format!("need 3 <= m <= n, got m={m}, n={n}")));
    }
    if n > MAX_DIM {
        return Err(FamilyError(format!("n={n} exceeds {MAX_DIM}")));
    }
    Ok(())
}

/// Paints the four windmill tiles of the frame `top..=bot × left..=right`
/// with ids `base+1 .. base+4`.
fn paint_ring(grid: &mut [Vec<usize>], top: usize, bot: usize, left: usize, right: usize, base: usize) {
    grid[top][left..right].fill(base + 1);
    for row in grid.iter_mut().take(bot).skip(top) {
        row[right] = base + 2;
    }
    grid[bot][left + 1..=right].fill(base + 3);
    for row in grid.iter_mut().take(bot + 1).skip(top + 1) {
        row[left] = base + 4;
    }
}

/// Concentric windmill rings while at least three rows remain, then one
/// tile for whatever interior is left (two rows for even `m`, one for odd).
/// Tile count `2m−3` (even) or `2m−1` (odd).
pub fn prop2(m: usize, n: usize) -> Result<TileStructure, FamilyError> {
    check_mn(m, n)?;
    let mut grid = vec![vec![0usize; n]; m];
    let mut r = 0;
    while m - 2 * r >= 3 {
        paint_ring(&mut grid, r, m - 1 - r, r, n - 1 - r, 4 * r);
        r += 1;
    }
    for row in grid.iter_mut().take(m - r).skip(r) {
        for cell in row.iter_mut().take(n - r).skip(r) {
            *cell = 4 * r + 1;
        }
    }
    Ok(TileStructure::from_cell_map(grid).expect("ring construction is a valid partition"))
}

/// One windmill ring around a single `(m−2) × (n−2)` interior tile.
pub fn five_tile(m: usize, n: usize) -> Result<TileStructure, FamilyError> {
    check_mn(m, n)?;
    let mut grid = vec![vec![5usize; n]; m];
    paint_ring(&mut grid, 0, m - 1, 0, n - 1, 0);
    Ok(TileStructure::from_cell_map(grid).expect("ring construction is a valid partition"))
}

const PROP3_BASE: [&str; 4] = [
    "4 4\n1 1 1 2\n4 5 5 2\n4 5 5 2\n4 3 3 3\n",
    "4 4\n1 1 6 2\n4 5 5 2\n4 5 5 2\n4 3 6 3\n",
    "4 4\n1 1 6 2\n7 5 5 7\n4 5 5 2\n4 3 6 3\n",
    "4 4\n1 1 7 8\n5 2 2 8\n5 6 3 3\n4 6 7 4\n",
];

/// An `m × m` U-tile structure with exactly `t` tiles, `5 ≤ t ≤ 2m`.
pub fn prop3(m: usize, t: usize) -> Result<TileStructure, FamilyError> {
    if m < 4 || t < 5 || t > 2 * m {
        return Err(FamilyError(format!("need m >= 4 and 5 <= t <= 2m, got m={m}, t={t}")));
    }
    if m > MAX_DIM {
        return Err(FamilyError(format!("m={m} exceeds {MAX_DIM}")));
    }
    Ok(TileStructure::from_cell_map(prop3_grid(m, t)).expect("prop3 construction is a valid partition"))
}

fn prop3_grid(m: usize, t: usize) -> Vec<Vec<usize>> {
    if m == 4 {
        return fixed(PROP3_BASE[t - 5]).cell_map().to_vec();
    }
    if t <= 2 * (m - 1) {
        // Duplicate the first row above, then the last column to the right.
        let mut grid = prop3_grid(m - 1, t);
        grid.insert(0, grid[0].clone());
        for row in &mut grid {
            row.push(*row.last().unwrap());
        }
        return grid;
    }
    let inner = prop3_grid(m - 1, 2 * (m - 1));
    let (a, b) = (2 * m - 1, 2 * m);
    let mut grid = Vec::with_capacity(m);
    if m % 2 == 1 {
        let mut top = if t == a { inner[0].clone() } else { vec![b; m - 1] };
        top.push(a);
        grid.push(top);
        for (i, row) in inner.iter().enumerate() {
            let mut row = row.clone();
            row.push(if i + 1 == m - 1 { 4 } else { a });
            grid.push(row);
        }
    } else {
        let mut top = vec![a; m];
        top[0] = 5;
        grid.push(top);
        for row in &inner {
            let mut next = row.clone();
            next.push(if t == a { *row.last().unwrap() } else { b });
            grid.push(next);
        }
    }
    grid
}

/// Appends copies of the last column until the grid is `n` wide.
pub fn extend_columns(ts: &TileStructure, n: usize) -> Result<TileStructure, FamilyError> {
    if n < ts.n() {
        return Err(FamilyError(format!("cannot shrink {} columns to {n}", ts.n())));
    }
    if n > MAX_DIM {
        return Err(FamilyError(format!("n={n} exceeds {MAX_DIM}")));
    }
    let grid: Vec<Vec<usize>> = ts
        .cell_map()
        .iter()
        .map(|row| {
            let mut row = row.clone();
            let last = *row.last().unwrap();
            row.resize(n, last);
            row
        })
        .collect();
    Ok(TileStructure::from_cell_map(grid).expect("copying a column keeps tiles rectangular"))
}

/// Every partition of an `m × n` grid into at most `max_tiles` separated
/// rectangles. Each tiling is built by repeatedly giving the first free cell
/// (row-major) a tile, so every partition appears exactly once.
pub fn all_tilings(m: usize, n: usize, max_tiles: usize) -> Vec<TileStructure> {
    let mut grid = vec![vec![0usize; n]; m];
    let mut out = Vec::new();
    extend_tiling(&mut grid, 1, max_tiles, &mut out);
    out
}

fn first_free(grid: &[Vec<usize>]) -> Option<(usize, usize)> {
    grid.iter()
        .enumerate()
        .find_map(|(r, row)| row.iter().position(|&v| v == 0).map(|c| (r, c)))
}

fn extend_tiling(grid: &mut Vec<Vec<usize>>, next: usize, max_tiles: usize, out: &mut Vec<TileStructure>) {
    let Some((r, c)) = first_free(grid) else {
        out.push(TileStructure::from_cell_map(grid.clone()).expect("disjoint rectangles"));
        return;
    };
    if next > max_tiles {
        return;
    }
    let (m, n) = (grid.len(), grid[0].len());
    // Rows below r and columns right of c, as bitmasks; r and c are forced.
    for rmask in 0u64..(1 << (m - r - 1)) {
        let rows: Vec<usize> = std::iter::once(r)
            .chain((0..m - r - 1).filter(|b| rmask >> b & 1 == 1).map(|b| r + 1 + b))
            .collect();
        for cmask in 0u64..(1 << (n - c - 1)) {
            let cols: Vec<usize> = std::iter::once(c)
                .chain((0..n - c - 1).filter(|b| cmask >> b & 1 == 1).map(|b| c + 1 + b))
                .collect();
            if rows.iter().all(|&i| cols.iter().all(|&j| grid[i][j] == 0)) {
                paint(grid, &rows, &cols, next);
                extend_tiling(grid, next + 1, max_tiles, out);
                paint(grid, &rows, &cols, 0);
            }
        }
    }
}

fn paint(grid: &mut [Vec<usize>], rows: &[usize], cols: &[usize], id: usize) {
    for &i in rows {
        for &j in cols {
            grid[i][j] = id;
        }
    }
}

/// A random partition of an `m × n` grid into separated rectangles. Each
/// tile grows from the first free cell; extra rows and columns are drawn
/// independently and dropped until the tile fits.
pub fn random_tiling<R: rand::Rng>(m: usize, n: usize, rng: &mut R) -> TileStructure {
    let mut grid = vec![vec![0usize; n]; m];
    let mut next = 1;
    while let Some((r, c)) = first_free(&grid) {
        let mut rows: Vec<usize> = std::iter::once(r)
            .chain((r + 1..m).filter(|_| rng.random_bool(0.5)))
            .collect();
        let mut cols: Vec<usize> = std::iter::once(c)
            .chain((c + 1..n).filter(|_| rng.random_bool(0.5)))
            .collect();
        while !rows.iter().all(|&i| cols.iter().all(|&j| grid[i][j] == 0)) {
            if rows.len() >= cols.len() && rows.len() > 1 {
                rows.pop();
            } else {
                cols.pop();
            }
        }
        paint(&mut grid, &rows, &cols, next);
        next += 1;
    }
    TileStructure::from_cell_map(grid).expect("disjoint rectangles")
}

//! Tile structures: an `m × n` grid partitioned into tiles, each tile being a
//! (possibly separated) combinatorial rectangle `rows × cols`.
//!
//! The `.tile` text format is
//!
//! ```text
//! # optional comment lines
//! 4 4
//! 1 1 2 3
//! 6 4 6 3
//! 6 4 6 3
//! 5 4 2 5
//! ```
//!
//! Tile ids are 1-based, row and column indices 0-based.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Largest supported grid side.
pub const MAX_DIM: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("grid {m}x{n} is outside the supported range 1..={max}", max = MAX_DIM)]
    UnsupportedSize { m: usize, n: usize },
    #[error("tile ids must be exactly 1..={expected}, found {found:?}")]
    IdSet { expected: usize, found: Vec<usize> },
    #[error(
        "tile {id} is not a separated rectangle: cell ({row}, {col}) is in its rows x cols but holds tile {found}"
    )]
    NotRectangle {
        id: usize,
        row: usize,
        col: usize,
        found: usize,
    },
    #[error("invalid tile structure: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tile {
    pub id: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Tile {
    pub fn new(id: usize, rows: Vec<usize>, cols: Vec<usize>) -> Self {
        Tile { id, rows, cols }
    }

    pub fn cell_count(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.rows.binary_search(&row).is_ok() && self.cols.binary_search(&col).is_ok()
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .flat_map(move |&r| self.cols.iter().map(move |&c| (r, c)))
    }

    pub fn row_mask(&self) -> u64 {
        mask_of(&self.rows)
    }

    pub fn col_mask(&self) -> u64 {
        mask_of(&self.cols)
    }
}

pub(crate) fn mask_of(indices: &[usize]) -> u64 {
    indices.iter().fold(0u64, |acc, &i| acc | (1u64 << i))
}

pub(crate) fn indices_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask & (1u64 << i) != 0).collect()
}

/// A partition of an `m × n` grid into tiles.
///
/// Values built through [`TileStructure::from_cell_map`] or the parser are
/// always valid. [`TileStructure::from_parts_unchecked`] exists so that
/// [`validate`] can be exercised on arbitrary, possibly broken, inputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileStructure {
    m: usize,
    n: usize,
    tiles: Vec<Tile>,
    cell_map: Vec<Vec<usize>>,
}

impl TileStructure {
    /// Builds and validates a structure from its grid of tile ids.
    pub fn from_cell_map(cell_map: Vec<Vec<usize>>) -> Result<Self, GridError> {
        let m = cell_map.len();
        let n = cell_map.first().map_or(0, Vec::len);
        if m == 0 || n == 0 || m > MAX_DIM || n > MAX_DIM {
            return Err(GridError::UnsupportedSize { m, n });
        }
        if let Some((r, row)) = cell_map.iter().enumerate().find(|(_, row)| row.len() != n) {
            return Err(GridError::DimensionMismatch(format!(
                "row {r} has {} entries, expected {n}",
                row.len()
            )));
        }

        let ids: BTreeSet<usize> = cell_map.iter().flatten().copied().collect();
        let s = ids.len();
        if ids.iter().copied().ne(1..=s) {
            return Err(GridError::IdSet {
                expected: s,
                found: ids.into_iter().collect(),
            });
        }

        let mut rows = vec![BTreeSet::new(); s];
        let mut cols = vec![BTreeSet::new(); s];
        let mut counts = vec![0usize; s];
        for (r, line) in cell_map.iter().enumerate() {
            for (c, &id) in line.iter().enumerate() {
                rows[id - 1].insert(r);
                cols[id - 1].insert(c);
                counts[id - 1] += 1;
            }
        }

        let mut tiles = Vec::with_capacity(s);
        for id in 1..=s {
            let tile = Tile::new(
                id,
                rows[id - 1].iter().copied().collect(),
                cols[id - 1].iter().copied().collect(),
            );
            if tile.cell_count() != counts[id - 1] {
                let (row, col) = tile
                    .cells()
                    .find(|&(r, c)| cell_map[r][c] != id)
                    .expect("a short tile has a foreign cell in its bounding rectangle");
                return Err(GridError::NotRectangle {
                    id,
                    row,
                    col,
                    found: cell_map[row][col],
                });
            }
            tiles.push(tile);
        }

        Ok(TileStructure { m, n, tiles, cell_map })
    }

    /// Assembles a structure without any checking. Run [`validate`] on it.
    pub fn from_parts_unchecked(m: usize, n: usize, tiles: Vec<Tile>, cell_map: Vec<Vec<usize>>) -> Self {
        TileStructure { m, n, tiles, cell_map }
    }

    /// Builds a structure from explicit tiles, deriving the cell map.
    pub fn from_tiles(m: usize, n: usize, tiles: Vec<Tile>) -> Result<Self, GridError> {
        if m == 0 || n == 0 || m > MAX_DIM || n > MAX_DIM {
            return Err(GridError::UnsupportedSize { m, n });
        }
        let mut tiles = tiles;
        tiles.sort_by_key(|t| t.id);
        let mut cell_map = vec![vec![0usize; n]; m];
        for t in &tiles {
            for (r, c) in t.cells() {
                if r >= m || c >= n {
                    return Err(GridError::DimensionMismatch(format!(
                        "tile {} reaches cell ({r}, {c}) outside the {m}x{n} grid",
                        t.id
                    )));
                }
                cell_map[r][c] = t.id;
            }
        }
        let candidate = TileStructure::from_parts_unchecked(m, n, tiles, cell_map);
        let report = validate(&candidate);
        if let Some(issue) = report.issues.first() {
            return Err(GridError::Invalid(issue.to_string()));
        }
        Ok(candidate)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tile_count(&self) -> usize {
        self.tiles.len()
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    /// Tile by 1-based id.
    pub fn tile(&self, id: usize) -> &Tile {
        &self.tiles[id - 1]
    }

    pub fn cell_map(&self) -> &[Vec<usize>] {
        &self.cell_map
    }

    pub fn cell(&self, row: usize, col: usize) -> usize {
        self.cell_map[row][col]
    }

    /// The same partition with rows and columns exchanged.
    pub fn transpose(&self) -> TileStructure {
        let cell_map = (0..self.n)
            .map(|c| (0..self.m).map(|r| self.cell_map[r][c]).collect())
            .collect();
        let tiles = self
            .tiles
            .iter()
            .map(|t| Tile::new(t.id, t.cols.clone(), t.rows.clone()))
            .collect();
        TileStructure {
            m: self.n,
            n: self.m,
            tiles,
            cell_map,
        }
    }

    /// Canonical `.tile` text.
    pub fn serialize(&self) -> String {
        serialize(self)
    }
}

impl FromStr for TileStructure {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_tile_grid(s)
    }
}

impl fmt::Display for TileStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

/// Reads the raw id grid without checking the tile invariants.
pub fn parse_cell_map(text: &str) -> Result<Vec<Vec<usize>>, GridError> {
    let mut lines = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });

    let (hline, header) = lines.next().ok_or(GridError::Syntax {
        line: 1,
        message: "missing \"m n\" header".into(),
    })?;
    let dims = parse_numbers(hline, header)?;
    let [m, n] = dims[..] else {
        return Err(GridError::Syntax {
            line: hline,
            message: format!("header must hold exactly two integers, found {}", dims.len()),
        });
    };
    if m == 0 || n == 0 || m > MAX_DIM || n > MAX_DIM {
        return Err(GridError::UnsupportedSize { m, n });
    }

    let mut cell_map = Vec::with_capacity(m);
    for (line, text) in lines {
        if cell_map.len() == m {
            return Err(GridError::DimensionMismatch(format!(
                "line {line}: more than the declared {m} grid rows"
            )));
        }
        let row = parse_numbers(line, text)?;
        if row.len() != n {
            return Err(GridError::Syntax {
                line,
                message: format!("ragged row: expected {n} ids, found {}", row.len()),
            });
        }
        if row.contains(&0) {
            return Err(GridError::Syntax {
                line,
                message: "tile ids are positive integers".into(),
            });
        }
        cell_map.push(row);
    }
    if cell_map.len() != m {
        return Err(GridError::DimensionMismatch(format!(
            "declared {m} rows, found {}",
            cell_map.len()
        )));
    }
    Ok(cell_map)
}

fn parse_numbers(line: usize, text: &str) -> Result<Vec<usize>, GridError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| GridError::Syntax {
                line,
                message: format!("bad token {tok:?}"),
            })
        })
        .collect()
}

/// Parses and validates `.tile` text.
pub fn parse_tile_grid(text: &str) -> Result<TileStructure, GridError> {
    TileStructure::from_cell_map(parse_cell_map(text)?)
}

/// Canonical text: header line, then the id grid; LF line endings.
pub fn serialize(ts: &TileStructure) -> String {
    let mut out = format!("{} {}\n", ts.m, ts.n);
    for row in &ts.cell_map {
        let line: Vec<String> = row.iter().map(usize::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    UnsupportedSize {
        m: usize,
        n: usize,
    },
    CellMapShape {
        detail: String,
    },
    EmptyTile {
        id: usize,
    },
    UnsortedIndices {
        id: usize,
    },
    OutOfBounds {
        id: usize,
        row: usize,
        col: usize,
    },
    IdsNotContiguous {
        ids: Vec<usize>,
    },
    Overlap {
        first: usize,
        second: usize,
        row: usize,
        col: usize,
    },
    Uncovered {
        row: usize,
        col: usize,
    },
    CellMapMismatch {
        id: usize,
        row: usize,
        col: usize,
        found: usize,
    },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::UnsupportedSize { m, n } => write!(f, "grid {m}x{n} outside 1..={MAX_DIM}"),
            Issue::CellMapShape { detail } => write!(f, "cell map shape: {detail}"),
            Issue::EmptyTile { id } => write!(f, "tile {id} has no rows or no columns"),
            Issue::UnsortedIndices { id } => write!(f, "tile {id} index sets are not strictly ascending"),
            Issue::OutOfBounds { id, row, col } => write!(f, "tile {id} reaches ({row}, {col}) outside the grid"),
            Issue::IdsNotContiguous { ids } => write!(f, "ids not contiguous: {ids:?}"),
            Issue::Overlap {
                first,
                second,
                row,
                col,
            } => {
                write!(f, "tiles {first} and {second} overlap at ({row}, {col})")
            }
            Issue::Uncovered { row, col } => write!(f, "cell ({row}, {col}) belongs to no tile"),
            Issue::CellMapMismatch { id, row, col, found } => {
                write!(f, "cell map holds {found} at ({row}, {col}) inside tile {id}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Lists every violated structure invariant; empty iff `ts` is valid.
pub fn validate(ts: &TileStructure) -> ValidationReport {
    let mut issues = Vec::new();
    let (m, n) = (ts.m, ts.n);
    if m == 0 || n == 0 || m > MAX_DIM || n > MAX_DIM {
        issues.push(Issue::UnsupportedSize { m, n });
        return ValidationReport { issues };
    }
    if ts.cell_map.len() != m || ts.cell_map.iter().any(|r| r.len() != n) {
        issues.push(Issue::CellMapShape {
            detail: format!("expected {m} rows of {n} ids"),
        });
    }

    let mut ids: Vec<usize> = ts.tiles.iter().map(|t| t.id).collect();
    ids.sort_unstable();
    if ids.iter().copied().ne(1..=ids.len()) {
        issues.push(Issue::IdsNotContiguous { ids: ids.clone() });
    }

    let mut owner: Vec<Vec<Option<usize>>> = vec![vec![None; n]; m];
    let mut reported_pairs = BTreeSet::new();
    for t in &ts.tiles {
        if t.rows.is_empty() || t.cols.is_empty() {
            issues.push(Issue::EmptyTile { id: t.id });
            continue;
        }
        if !t.rows.windows(2).all(|w| w[0] < w[1]) || !t.cols.windows(2).all(|w| w[0] < w[1]) {
            issues.push(Issue::UnsortedIndices { id: t.id });
        }
        for (r, c) in t.cells() {
            if r >= m || c >= n {
                issues.push(Issue::OutOfBounds {
                    id: t.id,
                    row: r,
                    col: c,
                });
                continue;
            }
            match owner[r][c] {
                Some(prev) => {
                    let key = (prev.min(t.id), prev.max(t.id));
                    if reported_pairs.insert(key) {
                        issues.push(Issue::Overlap {
                            first: key.0,
                            second: key.1,
                            row: r,
                            col: c,
                        });
                    }
                }
                None => owner[r][c] = Some(t.id),
            }
            if let Some(&found) = ts.cell_map.get(r).and_then(|row| row.get(c)) {
                if found != t.id {
                    issues.push(Issue::CellMapMismatch {
                        id: t.id,
                        row: r,
                        col: c,
                        found,
                    });
                }
            }
        }
    }
    for (r, row) in owner.iter().enumerate() {
        for (c, o) in row.iter().enumerate() {
            if o.is_none() {
                issues.push(Issue::Uncovered { row: r, col: c });
            }
        }
    }
    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = "4 4\n1 1 2 3\n6 4 6 3\n6 4 6 3\n5 4 2 5\n";

    #[test]
    fn parses_figure_one() {
        let ts = parse_tile_grid(FIG1).unwrap();
        assert_eq!(ts.tile_count(), 6);
        assert_eq!(ts.tile(1), &Tile::new(1, vec![0], vec![0, 1]));
        assert_eq!(ts.tile(6), &Tile::new(6, vec![1, 2], vec![0, 2]));
        assert!(validate(&ts).is_valid());
        assert_eq!(serialize(&ts), FIG1);
    }

    #[test]
    fn single_tile_row() {
        let ts = parse_tile_grid("1 2\n1 1").unwrap();
        assert_eq!(ts.tiles(), &[Tile::new(1, vec![0], vec![0, 1])]);
    }

    #[test]
    fn one_by_one() {
        let ts = parse_tile_grid("1 1\n1\n").unwrap();
        assert_eq!(serialize(&ts), "1 1\n1\n");
    }

    #[test]
    fn diagonal_is_rejected_with_counterexample() {
        let err = parse_tile_grid("2 2\n1 2\n2 1\n").unwrap_err();
        assert_eq!(
            err,
            GridError::NotRectangle {
                id: 1,
                row: 0,
                col: 1,
                found: 2
            }
        );
    }

    #[test]
    fn comments_and_crlf() {
        let text = "# figure one\r\n4 4\r\n1 1 2 3\r\n# mid comment\r\n6 4 6 3\r\n6 4 6 3\r\n5 4 2 5\r\n";
        let ts = parse_tile_grid(text).unwrap();
        assert_eq!(serialize(&ts), FIG1);
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            parse_tile_grid("2 2\n1 x\n1 1"),
            Err(GridError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_tile_grid("2 2\n1 1 1\n1 1"),
            Err(GridError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_tile_grid("2 2\n1 1"),
            Err(GridError::DimensionMismatch(_))
        ));
        assert!(matches!(
            parse_tile_grid("2 2\n1 1\n1 1\n1 1"),
            Err(GridError::DimensionMismatch(_))
        ));
        assert!(matches!(
            parse_tile_grid("2\n1 1"),
            Err(GridError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_tile_grid("65 1\n"),
            Err(GridError::UnsupportedSize { .. })
        ));
        assert!(matches!(parse_tile_grid(""), Err(GridError::Syntax { .. })));
        assert!(matches!(parse_tile_grid("1 2\n0 1"), Err(GridError::Syntax { .. })));
    }

    #[test]
    fn non_contiguous_ids_rejected_by_parser() {
        let err = parse_tile_grid("1 2\n1 3\n").unwrap_err();
        assert_eq!(
            err,
            GridError::IdSet {
                expected: 2,
                found: vec![1, 3]
            }
        );
    }

    #[test]
    fn validate_reports_overlap() {
        let tiles = vec![
            Tile::new(1, vec![0], vec![0, 1]),
            Tile::new(2, vec![0, 1], vec![1]),
            Tile::new(3, vec![1], vec![0]),
        ];
        let cell_map = vec![vec![1, 1], vec![3, 2]];
        let report = validate(&TileStructure::from_parts_unchecked(2, 2, tiles, cell_map));
        assert!(report.issues.contains(&Issue::Overlap {
            first: 1,
            second: 2,
            row: 0,
            col: 1
        }));
    }

    #[test]
    fn validate_reports_id_gap() {
        let tiles = vec![Tile::new(1, vec![0], vec![0]), Tile::new(3, vec![0], vec![1])];
        let report = validate(&TileStructure::from_parts_unchecked(1, 2, tiles, vec![vec![1, 3]]));
        assert_eq!(report.issues, vec![Issue::IdsNotContiguous { ids: vec![1, 3] }]);
        assert!(report.issues[0].to_string().starts_with("ids not contiguous"));
    }

    #[test]
    fn validate_reports_uncovered_and_out_of_bounds() {
        let tiles = vec![Tile::new(1, vec![0], vec![0, 2])];
        let report = validate(&TileStructure::from_parts_unchecked(1, 2, tiles, vec![vec![1, 1]]));
        assert!(report.issues.contains(&Issue::OutOfBounds { id: 1, row: 0, col: 2 }));
        assert!(report.issues.contains(&Issue::Uncovered { row: 0, col: 1 }));
    }

    #[test]
    fn transpose_is_involutive() {
        let ts = parse_tile_grid(FIG1).unwrap();
        let t = ts.transpose();
        assert!(validate(&t).is_valid());
        assert_eq!(t.transpose(), ts);
    }
}

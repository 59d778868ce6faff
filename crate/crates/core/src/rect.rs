//! Special rectangles and the U-tile decision.
//!
//! A special rectangle is a union of at least two tiles whose cells form a
//! combinatorial rectangle `rows × cols`. A structure is U-tile when no
//! special rectangle splits into two smaller rectangles, which is the same
//! as saying that, for every special rectangle, its members' row sets and
//! its members' column sets each form a connected intersection graph.

use crate::exec::{map_indexed, Execution};
use crate::grid::{indices_of, Tile, TileStructure};
use crate::state::ProductState;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on the number of tiles for subset enumeration.
pub const DEFAULT_MAX_TILES: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RectError {
    #[error("{tiles} tiles exceed the subset-enumeration cap of {cap}")]
    TooManyTiles { tiles: usize, cap: usize },
    #[error("verdict carries no witness")]
    MissingWitness,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpecialRectangle {
    pub tile_ids: Vec<usize>,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl SpecialRectangle {
    pub fn cell_count(&self) -> usize {
        self.rows.len() * self.cols.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
}

/// A special rectangle together with a split of its tiles into two parts
/// whose index sets along `axis` are disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub rectangle: SpecialRectangle,
    pub axis: Axis,
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UTileVerdict {
    pub is_u_tile: bool,
    pub witness: Option<Witness>,
}

/// How the split test on each special rectangle is performed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitCheck {
    /// Connectivity of the row/column intersection graphs.
    #[default]
    Connectivity,
    /// Literal search over all two-part splits of the member tiles.
    Bipartition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectConfig {
    pub max_tiles: usize,
    pub split_check: SplitCheck,
    pub execution: Execution,
}

impl Default for RectConfig {
    fn default() -> Self {
        RectConfig {
            max_tiles: DEFAULT_MAX_TILES,
            split_check: SplitCheck::Connectivity,
            execution: Execution::Parallel,
        }
    }
}

struct Masks {
    rows: Vec<u64>,
    cols: Vec<u64>,
    sizes: Vec<usize>,
}

impl Masks {
    fn of(tiles: &[Tile]) -> Self {
        Masks {
            rows: tiles.iter().map(Tile::row_mask).collect(),
            cols: tiles.iter().map(Tile::col_mask).collect(),
            sizes: tiles.iter().map(Tile::cell_count).collect(),
        }
    }

    fn is_rectangle(&self, members: u32) -> bool {
        let (mut r, mut c, mut cells) = (0u64, 0u64, 0usize);
        for i in bits(members) {
            r |= self.rows[i];
            c |= self.cols[i];
            cells += self.sizes[i];
        }
        cells == (r.count_ones() * c.count_ones()) as usize
    }
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask & (1u32 << i) != 0)
}

/// Every subset of at least two tiles whose union is a rectangle, sorted by
/// size then lexicographically by tile ids.
pub fn enumerate_special_rectangles(ts: &TileStructure) -> Result<Vec<SpecialRectangle>, RectError> {
    enumerate_with(ts, &RectConfig::default())
}

pub fn enumerate_with(ts: &TileStructure, cfg: &RectConfig) -> Result<Vec<SpecialRectangle>, RectError> {
    let s = ts.tile_count();
    let cap = cfg.max_tiles.min(32);
    if s > cap {
        return Err(RectError::TooManyTiles { tiles: s, cap });
    }
    let masks = Masks::of(ts.tiles());

    // Depth-first over tiles in index order, rooted at each possible
    // smallest member. A branch dies as soon as a tile that was skipped
    // meets the running bounding rectangle: the rectangle only grows, so
    // that cell can never be covered by a member.
    let per_root = map_indexed(s, cfg.execution, |root| {
        let mut found = Vec::new();
        let excluded: u32 = (1u32 << root) - 1;
        if !blocked(&masks, masks.rows[root], masks.cols[root], excluded) {
            dfs(
                &masks,
                s,
                root + 1,
                1u32 << root,
                excluded,
                masks.rows[root],
                masks.cols[root],
                masks.sizes[root],
                &mut found,
            );
        }
        found
    });

    let mut all: Vec<u32> = per_root.into_iter().flatten().collect();
    let mut rects: Vec<SpecialRectangle> = all
        .drain(..)
        .map(|members| {
            let ids: Vec<usize> = bits(members).map(|i| ts.tiles()[i].id).collect();
            let (r, c) = bits(members).fold((0u64, 0u64), |(r, c), i| (r | masks.rows[i], c | masks.cols[i]));
            SpecialRectangle {
                tile_ids: ids,
                rows: indices_of(r),
                cols: indices_of(c),
            }
        })
        .collect();
    rects.sort_by(|a, b| {
        a.tile_ids
            .len()
            .cmp(&b.tile_ids.len())
            .then_with(|| a.tile_ids.cmp(&b.tile_ids))
    });
    Ok(rects)
}

fn blocked(masks: &Masks, rows: u64, cols: u64, excluded: u32) -> bool {
    bits(excluded).any(|k| masks.rows[k] & rows != 0 && masks.cols[k] & cols != 0)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    masks: &Masks,
    s: usize,
    next: usize,
    chosen: u32,
    excluded: u32,
    rows: u64,
    cols: u64,
    cells: usize,
    out: &mut Vec<u32>,
) {
    if chosen.count_ones() >= 2 && cells == (rows.count_ones() * cols.count_ones()) as usize {
        out.push(chosen);
    }
    let mut skipped = excluded;
    for j in next..s {
        let r = rows | masks.rows[j];
        let c = cols | masks.cols[j];
        if !blocked(masks, r, c, skipped) {
            dfs(
                masks,
                s,
                j + 1,
                chosen | (1 << j),
                skipped,
                r,
                c,
                cells + masks.sizes[j],
                out,
            );
        }
        skipped |= 1 << j;
    }
}

/// Decides the U-tile property with the default configuration.
pub fn is_u_tile(ts: &TileStructure) -> Result<UTileVerdict, RectError> {
    is_u_tile_with(ts, &RectConfig::default())
}

/// On failure, the witness is taken from the first failing special
/// rectangle in enumeration order, checking the column axis before the row
/// axis.
pub fn is_u_tile_with(ts: &TileStructure, cfg: &RectConfig) -> Result<UTileVerdict, RectError> {
    let rects = enumerate_with(ts, cfg)?;
    for rect in rects {
        let split = match cfg.split_check {
            SplitCheck::Connectivity => connectivity_split(ts, &rect),
            SplitCheck::Bipartition => bipartition_split(ts, &rect),
        };
        if let Some((axis, first, second)) = split {
            return Ok(UTileVerdict {
                is_u_tile: false,
                witness: Some(Witness {
                    rectangle: rect,
                    axis,
                    first,
                    second,
                }),
            });
        }
    }
    Ok(UTileVerdict {
        is_u_tile: true,
        witness: None,
    })
}

type Split = (Axis, Vec<usize>, Vec<usize>);

fn connectivity_split(ts: &TileStructure, rect: &SpecialRectangle) -> Option<Split> {
    for axis in [Axis::Column, Axis::Row] {
        let sets: Vec<u64> = rect
            .tile_ids
            .iter()
            .map(|&id| match axis {
                Axis::Column => ts.tile(id).col_mask(),
                Axis::Row => ts.tile(id).row_mask(),
            })
            .collect();
        // Grow the component of the first member.
        let k = sets.len();
        let mut in_comp = vec![false; k];
        in_comp[0] = true;
        let mut reach = sets[0];
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..k {
                if !in_comp[i] && sets[i] & reach != 0 {
                    in_comp[i] = true;
                    reach |= sets[i];
                    changed = true;
                }
            }
        }
        if in_comp.iter().any(|&b| !b) {
            let (first, second) = partition_ids(&rect.tile_ids, |i| in_comp[i]);
            return Some((axis, first, second));
        }
    }
    None
}

/// Tries every split of the member tiles into two nonempty parts and asks
/// whether both parts are rectangles (a single tile always is).
fn bipartition_split(ts: &TileStructure, rect: &SpecialRectangle) -> Option<Split> {
    let members: Vec<Tile> = rect.tile_ids.iter().map(|&id| ts.tile(id).clone()).collect();
    let masks = Masks::of(&members);
    let k = members.len();
    let full: u32 = (1u32 << k) - 1;
    // Part one always holds member 0, which enumerates each split once.
    let mut candidates: Vec<u32> = (0..(1u32 << (k - 1)))
        .map(|x| (x << 1) | 1)
        .filter(|&p| p != full)
        .collect();
    candidates.sort_by_key(|p| p.reverse_bits());
    let mut found: Option<Split> = None;
    for part in candidates {
        let rest = full & !part;
        if masks.is_rectangle(part) && masks.is_rectangle(rest) {
            let pr = bits(part).fold(0u64, |a, i| a | masks.rows[i]);
            let axis = if pr.count_ones() as usize == rect.rows.len() {
                Axis::Column
            } else {
                Axis::Row
            };
            let (first, second) = partition_ids(&rect.tile_ids, |i| part & (1 << i) != 0);
            let candidate = (axis, first, second);
            match (&found, axis) {
                (None, _) => found = Some(candidate),
                (Some((Axis::Row, ..)), Axis::Column) => found = Some(candidate),
                _ => {}
            }
        }
    }
    found
}

fn partition_ids(ids: &[usize], in_first: impl Fn(usize) -> bool) -> (Vec<usize>, Vec<usize>) {
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (i, &id) in ids.iter().enumerate() {
        if in_first(i) {
            first.push(id);
        } else {
            second.push(id);
        }
    }
    (first, second)
}

/// The product state in the complement of `build_upb(ts)` that refutes
/// unextendibility: `Σ a_i φ_i^{(0,0)}` with `a_i = 1` on the first part and
/// `a_i = −ℓ/(h−ℓ)` on the second, `ℓ` and `h−ℓ` being the two parts'
/// extents along the witness axis.
pub fn extension_witness(ts: &TileStructure, verdict: &UTileVerdict) -> Result<ProductState, RectError> {
    let w = verdict.witness.as_ref().ok_or(RectError::MissingWitness)?;
    let along = |ids: &[usize]| -> Vec<usize> {
        let mask = ids.iter().fold(0u64, |acc, &id| {
            acc | match w.axis {
                Axis::Column => ts.tile(id).col_mask(),
                Axis::Row => ts.tile(id).row_mask(),
            }
        });
        indices_of(mask)
    };
    let first = along(&w.first);
    let second = along(&w.second);
    let ell = first.len() as f64;
    let rest = second.len() as f64;
    let weight = Complex64::new(-ell / rest, 0.0);

    let (split_len, flat_len, flat) = match w.axis {
        Axis::Column => (ts.n(), ts.m(), &w.rectangle.rows),
        Axis::Row => (ts.m(), ts.n(), &w.rectangle.cols),
    };
    let mut split = vec![Complex64::new(0.0, 0.0); split_len];
    for &i in &first {
        split[i] = Complex64::new(1.0, 0.0);
    }
    for &i in &second {
        split[i] = weight;
    }
    let mut indicator = vec![Complex64::new(0.0, 0.0); flat_len];
    for &i in flat {
        indicator[i] = Complex64::new(1.0, 0.0);
    }
    let state = match w.axis {
        Axis::Column => ProductState::new(indicator, split),
        Axis::Row => ProductState::new(split, indicator),
    };
    Ok(state.expect("witness factors are nonzero"))
}

//! Unextendible product bases from tile structures.
//!
//! Parsing and validation of tile grids, special-rectangle analysis and the
//! U-tile decision, tile-basis product states, a seesaw oracle for product
//! vectors in subspaces, the associated PPT states, and simulation of
//! entanglement-assisted local discrimination protocols.

pub mod exec;
pub mod families;
pub mod grid;
pub mod json;
pub mod linalg;
pub mod locc;
pub mod ppt;
pub mod rect;
pub mod state;
pub mod verify;

pub use exec::Execution;
pub use grid::{parse_tile_grid, validate, Tile, TileStructure};
pub use rect::{enumerate_special_rectangles, extension_witness, is_u_tile, SpecialRectangle, UTileVerdict};
pub use state::{build_copb, build_upb, stopper, tile_basis, BipartiteState, ProductState, UpbSet};

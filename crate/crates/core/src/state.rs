//! Bipartite pure states as `m × n` coefficient matrices, product states,
//! tile bases, the stopper state, and assembly of the complete basis and the
//! unextendible product basis of a tile structure.
//!
//! States are never normalized here: the entry `(i, j)` of a state's matrix
//! is the coefficient of `|i⟩|j⟩` exactly as constructed.

use crate::grid::{Tile, TileStructure};
use crate::linalg::{root_of_unity, singular_values, CMatrix, ONE, ZERO};
use crate::rect::{self, UTileVerdict};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("product state factors must be nonzero")]
    ZeroFactor,
    #[error("tile structure is not a U-tile structure")]
    NotUTile(Box<UTileVerdict>),
    #[error(transparent)]
    Rect(#[from] rect::RectError),
}

/// A bipartite pure state `Σ m_ij |i⟩|j⟩` held as its matrix `M = (m_ij)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartiteState {
    matrix: CMatrix,
}

impl BipartiteState {
    pub fn from_matrix(matrix: CMatrix) -> Self {
        BipartiteState { matrix }
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        BipartiteState {
            matrix: CMatrix::zeros(m, n),
        }
    }

    /// `|i⟩|j⟩`.
    pub fn basis(m: usize, n: usize, i: usize, j: usize) -> Self {
        let mut s = Self::zeros(m, n);
        s.matrix[(i, j)] = ONE;
        s
    }

    /// Reshapes a length-`m·n` amplitude vector (row-major in `(i, j)`).
    pub fn from_amplitudes(m: usize, n: usize, amps: Vec<Complex64>) -> Self {
        BipartiteState {
            matrix: CMatrix::from_vec(m, n, amps),
        }
    }

    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n(&self) -> usize {
        self.matrix.cols()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m(), self.n())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Row-major amplitudes, i.e. the state as a vector in `C^m ⊗ C^n`.
    pub fn amplitudes(&self) -> &[Complex64] {
        self.matrix.as_slice()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.matrix.frobenius_norm_sqr()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.as_slice().iter().all(|z| *z == ZERO)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        BipartiteState {
            matrix: self.matrix.scale(s),
        }
    }

    pub fn normalized(&self) -> Self {
        self.scaled(Complex64::new(1.0 / self.norm_sqr().sqrt(), 0.0))
    }
}

/// `⟨ψ1|ψ2⟩ = tr(M1† M2)`.
pub fn inner_product(s1: &BipartiteState, s2: &BipartiteState) -> Result<Complex64, StateError> {
    if s1.dims() != s2.dims() {
        return Err(StateError::DimensionMismatch {
            left: s1.dims(),
            right: s2.dims(),
        });
    }
    Ok(s1.matrix.hs_inner(&s2.matrix))
}

/// Numerical rank: singular values above `tol · σ_max`.
pub fn matrix_rank(s: &BipartiteState, tol: f64) -> usize {
    let sv = singular_values(&s.matrix);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&x| x > tol * top).count()
}

/// `|a⟩ ⊗ |b⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    #[serde(with = "crate::json::complex_vec")]
    a: Vec<Complex64>,
    #[serde(with = "crate::json::complex_vec")]
    b: Vec<Complex64>,
}

impl ProductState {
    pub fn new(a: Vec<Complex64>, b: Vec<Complex64>) -> Result<Self, StateError> {
        if a.iter().all(|z| *z == ZERO) || b.iter().all(|z| *z == ZERO) {
            return Err(StateError::ZeroFactor);
        }
        Ok(ProductState { a, b })
    }

    /// `|i⟩|j⟩`.
    pub fn basis(m: usize, n: usize, i: usize, j: usize) -> Self {
        let mut a = vec![ZERO; m];
        let mut b = vec![ZERO; n];
        a[i] = ONE;
        b[j] = ONE;
        ProductState { a, b }
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a.len(), self.b.len())
    }

    pub fn to_state(&self) -> BipartiteState {
        BipartiteState::from_matrix(CMatrix::outer(&self.a, &self.b))
    }

    pub fn norm_sqr(&self) -> f64 {
        crate::linalg::norm_sqr(&self.a) * crate::linalg::norm_sqr(&self.b)
    }

    /// Same state with unit-norm factors.
    pub fn normalized(&self) -> Self {
        let na = crate::linalg::norm_sqr(&self.a).sqrt();
        let nb = crate::linalg::norm_sqr(&self.b).sqrt();
        ProductState {
            a: self.a.iter().map(|z| z / na).collect(),
            b: self.b.iter().map(|z| z / nb).collect(),
        }
    }

    /// `⟨self|other⟩ = ⟨a|a'⟩⟨b|b'⟩`.
    pub fn inner(&self, other: &ProductState) -> Complex64 {
        crate::linalg::vdot(&self.a, &other.a) * crate::linalg::vdot(&self.b, &other.b)
    }
}

/// The `p·q` states of a tile with rows `r_0 < … < r_{p-1}` and columns
/// `c_0 < … < c_{q-1}`:
/// `|φ^{(k,l)}⟩ = (Σ_e w_p^{ke} |r_e⟩)(Σ_e w_q^{le} |c_e⟩)`, in row-major
/// `(k, l)` order. `φ^{(0,0)}` is all-ones on the tile.
pub fn tile_basis(tile: &Tile, m: usize, n: usize) -> Vec<ProductState> {
    let p = tile.rows.len();
    let q = tile.cols.len();
    let mut out = Vec::with_capacity(p * q);
    for k in 0..p {
        let mut a = vec![ZERO; m];
        for (e, &r) in tile.rows.iter().enumerate() {
            a[r] = root_of_unity(p, k * e);
        }
        for l in 0..q {
            let mut b = vec![ZERO; n];
            for (e, &c) in tile.cols.iter().enumerate() {
                b[c] = root_of_unity(q, l * e);
            }
            out.push(ProductState { a: a.clone(), b });
        }
    }
    out
}

/// `(Σ_e |e⟩)(Σ_j |j⟩)`, whose matrix is all-ones.
pub fn stopper(m: usize, n: usize) -> ProductState {
    ProductState {
        a: vec![ONE; m],
        b: vec![ONE; n],
    }
}

/// Every tile's basis, concatenated in tile-id order.
pub fn build_copb(ts: &TileStructure) -> Vec<ProductState> {
    ts.tiles().iter().flat_map(|t| tile_basis(t, ts.m(), ts.n())).collect()
}

/// Provenance of a member of a [`UpbSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateLabel {
    Tile { id: usize, k: usize, l: usize },
    Stopper,
}

/// The product basis obtained from a tile structure by dropping each tile's
/// `φ^{(0,0)}` and appending the stopper.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpbSet {
    pub m: usize,
    pub n: usize,
    /// Kept tile states in tile-id then `(k, l)` order; the stopper is last.
    pub states: Vec<ProductState>,
    pub labels: Vec<StateLabel>,
    /// The omitted `φ_i^{(0,0)}`, one per tile, in tile-id order.
    pub missing: Vec<ProductState>,
    pub stopper: ProductState,
    pub origin: TileStructure,
}

impl UpbSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, label: StateLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn stopper_index(&self) -> usize {
        self.states.len() - 1
    }

    pub fn bipartite_states(&self) -> Vec<BipartiteState> {
        self.states.iter().map(ProductState::to_state).collect()
    }
}

/// Assembles the candidate UPB of `ts`. With `check`, refuses structures
/// that are not U-tile, carrying the verdict and its witness.
pub fn build_upb(ts: &TileStructure, check: bool) -> Result<UpbSet, StateError> {
    if check {
        let verdict = rect::is_u_tile(ts)?;
        if !verdict.is_u_tile {
            return Err(StateError::NotUTile(Box::new(verdict)));
        }
    }
    let (m, n) = (ts.m(), ts.n());
    let mut states = Vec::with_capacity(m * n - ts.tile_count() + 1);
    let mut labels = Vec::with_capacity(states.capacity());
    let mut missing = Vec::with_capacity(ts.tile_count());
    for tile in ts.tiles() {
        let q = tile.cols.len();
        for (idx, st) in tile_basis(tile, m, n).into_iter().enumerate() {
            let (k, l) = (idx / q, idx % q);
            if k == 0 && l == 0 {
                missing.push(st);
            } else {
                states.push(st);
                labels.push(StateLabel::Tile { id: tile.id, k, l });
            }
        }
    }
    let stop = stopper(m, n);
    states.push(stop.clone());
    labels.push(StateLabel::Stopper);
    Ok(UpbSet {
        m,
        n,
        states,
        labels,
        missing,
        stopper: stop,
        origin: ts.clone(),
    })
}

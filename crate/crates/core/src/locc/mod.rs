//! Entanglement-assisted local discrimination.
//!
//! Each input is a product state `|ψ⟩_{AB}` tensored with the unnormalized
//! resource `Σ_x |xx⟩_{ab}` of dimension `d`. Alice holds `A ⊗ a`, Bob holds
//! `B ⊗ b`; a composite state is stored as an `(m·d) × (n·d)` matrix `Ψ`
//! with Alice's joint index `i·d + x` and Bob's `j·d + y`. An Alice
//! projector acts as `P·Ψ`, a Bob projector as `Ψ·Qᵀ`.

mod builders;
mod protocol;
mod simulate;

pub use builders::{build_lemma1_protocol, build_theorem3_protocol};
pub use protocol::{equivalent, Embedding, Outcome, Protocol, ProtocolNode};
pub use simulate::{
    check_branches, verify_protocol, BranchDefect, DiscriminationReport, LeafFailure, Misidentification, StateOutcome,
    PRUNE_TOL,
};

use crate::linalg::CMatrix;
use crate::state::{ProductState, StateLabel, UpbSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoccError {
    #[error("invalid protocol parameters: {0}")]
    Parameter(String),
    #[error("malformed protocol: {0}")]
    Malformed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeState {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub matrix: CMatrix,
}

impl CompositeState {
    pub fn norm_sqr(&self) -> f64 {
        self.matrix.frobenius_norm_sqr()
    }

    /// Amplitude of `|i⟩_A |j⟩_B |x⟩_a |y⟩_b`.
    pub fn amplitude(&self, i: usize, j: usize, x: usize, y: usize) -> num_complex::Complex64 {
        self.matrix[(i * self.d + x, j * self.d + y)]
    }
}

/// `|ψ⟩_{AB} ⊗ Σ_x |xx⟩_{ab}` for each input.
pub fn attach_resource(states: &[ProductState], d: usize) -> Vec<CompositeState> {
    let bell = CMatrix::identity(d);
    states
        .iter()
        .map(|p| {
            let (m, n) = p.dims();
            CompositeState {
                m,
                n,
                d,
                matrix: CMatrix::outer(p.a(), p.b()).kron(&bell),
            }
        })
        .collect()
}

/// A labelled input to the simulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: StateLabel,
    pub state: CompositeState,
}

/// Every member of `upb` with the resource attached.
pub fn candidates_for(upb: &UpbSet, d: usize) -> Vec<Candidate> {
    attach_resource(&upb.states, d)
        .into_iter()
        .zip(&upb.labels)
        .map(|(state, &label)| Candidate { label, state })
        .collect()
}

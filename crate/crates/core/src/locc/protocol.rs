//! Measurement trees.

use super::Party;
use crate::linalg::CMatrix;
use crate::state::StateLabel;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub m: usize,
    pub n: usize,
    pub resource_dim: usize,
    pub root: ProtocolNode,
}

impl Protocol {
    pub fn alice_dim(&self) -> usize {
        self.m * self.resource_dim
    }

    pub fn bob_dim(&self) -> usize {
        self.n * self.resource_dim
    }

    /// The same tree with every embedded subtree expanded into operators on
    /// the full registers.
    pub fn materialized(&self) -> Protocol {
        Protocol {
            root: self.root.materialize(self.alice_dim(), self.bob_dim()),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub projector: CMatrix,
    pub child: ProtocolNode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum ProtocolNode {
    /// A projective measurement by one party on its joint register.
    Branch { party: Party, outcomes: Vec<Outcome> },
    /// Exactly one candidate can be left here.
    Identify { label: StateLabel },
    /// The survivors are product across the cut, equal on the other party
    /// and orthogonal on `party`, who finishes with one measurement.
    OnePartyFinish { party: Party, candidates: Vec<StateLabel> },
    /// A subtree written for smaller registers, lifted by `embedding`.
    Embedded {
        embedding: Embedding,
        inner: Box<ProtocolNode>,
    },
}

/// Index maps from an inner pair of registers into the enclosing ones.
/// A lifted projector is `E P Eᵀ`; the part of the outer register outside
/// the image is added to the last outcome of each branch so every
/// measurement stays complete.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub description: String,
    pub alice_map: Vec<usize>,
    pub bob_map: Vec<usize>,
    /// Added to tile ids in the inner subtree's leaf labels.
    pub tile_id_offset: usize,
}

struct Lift {
    alice_dim: usize,
    bob_dim: usize,
    alice_map: Vec<usize>,
    bob_map: Vec<usize>,
    offset: usize,
}

impl Lift {
    fn identity(alice_dim: usize, bob_dim: usize) -> Self {
        Lift {
            alice_dim,
            bob_dim,
            alice_map: (0..alice_dim).collect(),
            bob_map: (0..bob_dim).collect(),
            offset: 0,
        }
    }

    fn compose(&self, e: &Embedding) -> Lift {
        Lift {
            alice_dim: self.alice_dim,
            bob_dim: self.bob_dim,
            alice_map: e.alice_map.iter().map(|&k| self.alice_map[k]).collect(),
            bob_map: e.bob_map.iter().map(|&k| self.bob_map[k]).collect(),
            offset: self.offset + e.tile_id_offset,
        }
    }

    fn label(&self, l: StateLabel) -> StateLabel {
        match l {
            StateLabel::Tile { id, k, l } => StateLabel::Tile {
                id: id + self.offset,
                k,
                l,
            },
            StateLabel::Stopper => StateLabel::Stopper,
        }
    }

    fn map_and_dim(&self, party: Party) -> (&[usize], usize) {
        match party {
            Party::Alice => (&self.alice_map, self.alice_dim),
            Party::Bob => (&self.bob_map, self.bob_dim),
        }
    }
}

impl ProtocolNode {
    pub fn materialize(&self, alice_dim: usize, bob_dim: usize) -> ProtocolNode {
        self.lift(&Lift::identity(alice_dim, bob_dim))
    }

    fn lift(&self, ctx: &Lift) -> ProtocolNode {
        match self {
            ProtocolNode::Branch { party, outcomes } => {
                let (map, dim) = ctx.map_and_dim(*party);
                let mut lifted: Vec<Outcome> = outcomes
                    .iter()
                    .map(|o| {
                        let mut p = CMatrix::zeros(dim, dim);
                        for (r, &ro) in map.iter().enumerate() {
                            for (c, &co) in map.iter().enumerate() {
                                p[(ro, co)] = o.projector[(r, c)];
                            }
                        }
                        Outcome {
                            projector: p,
                            child: o.child.lift(ctx),
                        }
                    })
                    .collect();
                if map.len() < dim {
                    if let Some(last) = lifted.last_mut() {
                        let mut outside = vec![true; dim];
                        for &k in map {
                            outside[k] = false;
                        }
                        for (k, _) in outside.iter().enumerate().filter(|(_, &o)| o) {
                            last.projector[(k, k)] += Complex64::new(1.0, 0.0);
                        }
                    }
                }
                ProtocolNode::Branch {
                    party: *party,
                    outcomes: lifted,
                }
            }
            ProtocolNode::Identify { label } => ProtocolNode::Identify {
                label: ctx.label(*label),
            },
            ProtocolNode::OnePartyFinish { party, candidates } => ProtocolNode::OnePartyFinish {
                party: *party,
                candidates: candidates.iter().map(|&l| ctx.label(l)).collect(),
            },
            ProtocolNode::Embedded { embedding, inner } => inner.lift(&ctx.compose(embedding)),
        }
    }

    /// Number of branch nodes, counting through embeddings.
    pub fn branch_count(&self) -> usize {
        match self {
            ProtocolNode::Branch { outcomes, .. } => 1 + outcomes.iter().map(|o| o.child.branch_count()).sum::<usize>(),
            ProtocolNode::Embedded { inner, .. } => inner.branch_count(),
            _ => 0,
        }
    }
}

/// Structural equality of two materialized trees up to the order of the
/// outcomes at each branch, with projectors compared entrywise within
/// `tol` and leaf candidate lists compared as sets.
pub fn equivalent(a: &ProtocolNode, b: &ProtocolNode, tol: f64) -> bool {
    use ProtocolNode::*;
    match (a, b) {
        (
            Branch {
                party: pa,
                outcomes: oa,
            },
            Branch {
                party: pb,
                outcomes: ob,
            },
        ) => pa == pb && oa.len() == ob.len() && match_outcomes(oa, ob, &mut vec![false; ob.len()], tol),
        (Identify { label: la }, Identify { label: lb }) => la == lb,
        (
            OnePartyFinish {
                party: pa,
                candidates: ca,
            },
            OnePartyFinish {
                party: pb,
                candidates: cb,
            },
        ) => {
            let mut x = ca.clone();
            let mut y = cb.clone();
            x.sort_by_key(|l| format!("{l:?}"));
            y.sort_by_key(|l| format!("{l:?}"));
            pa == pb && x == y
        }
        _ => false,
    }
}

fn match_outcomes(oa: &[Outcome], ob: &[Outcome], used: &mut Vec<bool>, tol: f64) -> bool {
    let Some((first, rest)) = oa.split_first() else {
        return true;
    };
    for j in 0..ob.len() {
        if used[j] || first.projector.max_abs_diff(&ob[j].projector) > tol {
            continue;
        }
        if equivalent(&first.child, &ob[j].child, tol) {
            used[j] = true;
            if match_outcomes(rest, ob, used, tol) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(id: usize) -> ProtocolNode {
        ProtocolNode::Identify {
            label: StateLabel::Tile { id, k: 0, l: 1 },
        }
    }

    #[test]
    fn embedding_pads_last_outcome_and_offsets_labels() {
        let inner = ProtocolNode::Branch {
            party: Party::Alice,
            outcomes: vec![
                Outcome {
                    projector: CMatrix::diagonal_projector(2, [0]),
                    child: leaf(1),
                },
                Outcome {
                    projector: CMatrix::diagonal_projector(2, [1]),
                    child: leaf(2),
                },
            ],
        };
        let node = ProtocolNode::Embedded {
            embedding: Embedding {
                description: "shift by one".into(),
                alice_map: vec![1, 2],
                bob_map: vec![0],
                tile_id_offset: 4,
            },
            inner: Box::new(inner),
        };
        let flat = node.materialize(3, 1);
        let ProtocolNode::Branch { outcomes, .. } = &flat else {
            panic!("expected branch");
        };
        assert_eq!(outcomes[0].projector, CMatrix::diagonal_projector(3, [1]));
        assert_eq!(outcomes[1].projector, CMatrix::diagonal_projector(3, [0, 2]));
        assert_eq!(outcomes[1].child, leaf(6));
    }

    #[test]
    fn equivalence_ignores_outcome_order() {
        let p0 = CMatrix::diagonal_projector(2, [0]);
        let p1 = CMatrix::diagonal_projector(2, [1]);
        let mk = |x: &CMatrix, y: &CMatrix, a, b| ProtocolNode::Branch {
            party: Party::Bob,
            outcomes: vec![
                Outcome {
                    projector: x.clone(),
                    child: leaf(a),
                },
                Outcome {
                    projector: y.clone(),
                    child: leaf(b),
                },
            ],
        };
        assert!(equivalent(&mk(&p0, &p1, 1, 2), &mk(&p1, &p0, 2, 1), 1e-12));
        assert!(!equivalent(&mk(&p0, &p1, 1, 2), &mk(&p1, &p0, 1, 2), 1e-12));
    }
}

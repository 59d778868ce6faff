//! Discrimination protocols for the windmill bases of even `m`.
//!
//! Tiles of the outermost ring: 1 = top row without its last cell,
//! 2 = right column without its bottom cell, 3 = bottom row without its
//! first cell, 4 = left column without its top cell. Inner rings carry ids
//! shifted by 4 per ring.

use super::protocol::{Embedding, Outcome, Protocol, ProtocolNode};
use super::{LoccError, Party};
use crate::linalg::{root_of_unity, CMatrix, ONE, ZERO};
use crate::state::StateLabel;
use num_complex::Complex64;

fn tile(id: usize, k: usize, l: usize) -> StateLabel {
    StateLabel::Tile { id, k, l }
}

fn branch(party: Party, outcomes: Vec<(CMatrix, ProtocolNode)>) -> ProtocolNode {
    ProtocolNode::Branch {
        party,
        outcomes: outcomes
            .into_iter()
            .map(|(projector, child)| Outcome { projector, child })
            .collect(),
    }
}

fn finish(party: Party, mut candidates: Vec<StateLabel>) -> ProtocolNode {
    candidates.push(StateLabel::Stopper);
    ProtocolNode::OnePartyFinish { party, candidates }
}

fn basis_vec(dim: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; dim];
    v[k] = ONE;
    v
}

/// `Σ_{j∈support} w_len^{ij} |j⟩` with `len = support.len()`.
fn fourier_vec(dim: usize, support: std::ops::Range<usize>, i: usize) -> Vec<Complex64> {
    let len = support.len();
    let mut v = vec![ZERO; dim];
    for j in support {
        v[j] = root_of_unity(len, i * j);
    }
    v
}

fn proj(v: &[Complex64]) -> CMatrix {
    CMatrix::rank_one_projector(v)
}

fn diag(dim: usize, support: impl IntoIterator<Item = usize>) -> CMatrix {
    CMatrix::diagonal_projector(dim, support)
}

fn complement(dim: usize, parts: &[&CMatrix]) -> CMatrix {
    parts.iter().fold(CMatrix::identity(dim), |acc, p| acc.sub(p))
}

/// A measurement of the resource half `b` (or `a`) in the Fourier basis of
/// levels `0..levels`, leaving the local system untouched. Levels at or
/// above `levels` are merged into the last outcome.
fn level_fourier(
    party: Party,
    local: usize,
    d: usize,
    levels: usize,
    child: impl Fn() -> ProtocolNode,
) -> ProtocolNode {
    let mut ops: Vec<CMatrix> = (0..levels)
        .map(|j| CMatrix::identity(local).kron(&proj(&fourier_vec(d, 0..levels, j))))
        .collect();
    if levels < d {
        let rest = CMatrix::identity(local).kron(&diag(d, levels..d));
        let last = ops.pop().unwrap().add(&rest);
        ops.push(last);
    }
    branch(party, ops.into_iter().map(|p| (p, child())).collect())
}

/// The subtree that follows Alice's first outcome `A_1`, on registers of
/// dimension `m·ι` and `n·ι` with `ι = m/2`.
fn after_a1(m: usize, n: usize) -> ProtocolNode {
    let d = m / 2;
    let bob = n * d;
    let top = diag(d, [d - 1]);

    // Fourier vectors on columns 1..n-1 paired with the top resource level.
    let mut outcomes = Vec::with_capacity(n + 1);
    let mut taken = Vec::with_capacity(n);
    for i in 1..n {
        let op = proj(&fourier_vec(n, 1..n, i)).kron(&top);
        let child = if i < n - 1 {
            ProtocolNode::Identify { label: tile(3, 0, i) }
        } else {
            ProtocolNode::Identify {
                label: StateLabel::Stopper,
            }
        };
        taken.push(op.clone());
        outcomes.push((op, child));
    }

    let right: Vec<StateLabel> = (1..m - 1).map(|k| tile(2, k, 0)).collect();
    let b_n = diag(n, [n - 1]).kron(&diag(d, 0..d - 1));
    let right_child = if d == 2 {
        finish(Party::Alice, right)
    } else {
        level_fourier(Party::Bob, n, d, d - 1, || finish(Party::Alice, right.clone()))
    };
    taken.push(b_n.clone());
    outcomes.push((b_n, right_child));

    let refs: Vec<&CMatrix> = taken.iter().collect();
    let b_rest = complement(bob, &refs);
    outcomes.push((b_rest, after_b_rest(m, n)));
    branch(Party::Bob, outcomes)
}

fn after_b_rest(m: usize, n: usize) -> ProtocolNode {
    let d = m / 2;
    let a1 = diag(m, [0]).kron(&diag(d, [0]));
    let a2 = complement(m * d, &[&a1]);
    let top_row: Vec<StateLabel> = (1..n - 1).map(|l| tile(1, 0, l)).collect();

    let b1 = diag(n, [0]).kron(&CMatrix::identity(d));
    let b2 = complement(n * d, &[&b1]);
    let left: Vec<StateLabel> = (1..m - 1).map(|k| tile(4, k, 0)).collect();
    let left_child = level_fourier(Party::Bob, n, d, d, || finish(Party::Alice, left.clone()));

    branch(
        Party::Alice,
        vec![
            (a1, finish(Party::Bob, top_row)),
            (a2, branch(Party::Bob, vec![(b1, left_child), (b2, interior(m, n))])),
        ],
    )
}

/// What remains once the outer ring is resolved: the central two-row tile
/// for `m = 4`, otherwise the same construction one ring inwards.
fn interior(m: usize, n: usize) -> ProtocolNode {
    let d = m / 2;
    if m == 4 {
        return center_split(n, d);
    }
    let (di, mi, ni) = (d - 1, m - 2, n - 2);
    let alice_map = (0..mi * di).map(|k| (k / di + 1) * d + k % di).collect();
    let bob_map = (0..ni * di).map(|k| (k / di + 1) * d + k % di).collect();
    ProtocolNode::Embedded {
        embedding: Embedding {
            description: format!(
                "rows 1..{} and columns 1..{} shifted by one, resource levels 0..{} unchanged",
                m - 2,
                n - 2,
                d - 2
            ),
            alice_map,
            bob_map,
            tile_id_offset: 4,
        },
        inner: Box::new(after_a1(mi, ni)),
    }
}

/// Alice separates `|1⟩+|2⟩` from `|1⟩−|2⟩` on the two central rows of a
/// four-row grid; Bob finishes each side.
fn center_split(n: usize, d: usize) -> ProtocolNode {
    let mut plus = basis_vec(4, 1);
    plus[2] = ONE;
    let p = proj(&plus).kron(&CMatrix::identity(d));
    let q = complement(4 * d, &[&p]);
    let c = 5;
    let plus_states: Vec<StateLabel> = (1..n - 2).map(|l| tile(c, 0, l)).collect();
    let minus_states: Vec<StateLabel> = (0..n - 2).map(|l| tile(c, 1, l)).collect();
    branch(
        Party::Alice,
        vec![
            (p, finish(Party::Bob, plus_states)),
            (
                q,
                ProtocolNode::OnePartyFinish {
                    party: Party::Bob,
                    candidates: minus_states,
                },
            ),
        ],
    )
}

/// `A_i` keeps rows `r < ι` with level `i−1` and rows `ι + j` with level
/// `(j + i − 1) mod ι`.
fn alice_root_projector(m: usize, i: usize) -> CMatrix {
    let d = m / 2;
    diag(
        m * d,
        (0..m).map(|r| {
            let level = if r < d { i - 1 } else { (r - d + i - 1) % d };
            r * d + level
        }),
    )
}

fn check_even(m: usize, n: usize) -> Result<(), LoccError> {
    if m % 2 == 1 {
        return Err(LoccError::Parameter(format!("m={m} is odd; only even m is supported")));
    }
    if m < 4 || n < m {
        return Err(LoccError::Parameter(format!("need 4 <= m <= n, got m={m}, n={n}")));
    }
    Ok(())
}

/// Protocol for `build_upb(prop2(m, n))` with an `m/2`-level resource.
/// Alice's root outcome `A_i` differs from `A_1` only by the cyclic shift
/// `x ↦ x + i − 1` on both resource halves, so its subtree is the `A_1`
/// subtree conjugated by that shift.
pub fn build_theorem3_protocol(m: usize, n: usize) -> Result<Protocol, LoccError> {
    check_even(m, n)?;
    let d = m / 2;
    let outcomes = (1..=d)
        .map(|i| {
            let child = if i == 1 {
                after_a1(m, n)
            } else {
                let shift = |k: usize| (k / d) * d + (k % d + i - 1) % d;
                ProtocolNode::Embedded {
                    embedding: Embedding {
                        description: format!("resource levels shifted by {}", i - 1),
                        alice_map: (0..m * d).map(shift).collect(),
                        bob_map: (0..n * d).map(shift).collect(),
                        tile_id_offset: 0,
                    },
                    inner: Box::new(after_a1(m, n)),
                }
            };
            (alice_root_projector(m, i), child)
        })
        .collect();
    Ok(Protocol {
        m,
        n,
        resource_dim: d,
        root: branch(Party::Alice, outcomes),
    })
}

/// The four-row protocol written out operator by operator with a two-qubit
/// resource. The `A_2` subtree is the `A_1` subtree with both resource
/// halves relabelled `0 ↔ 1`.
pub fn build_lemma1_protocol(n: usize) -> Result<Protocol, LoccError> {
    if n < 4 {
        return Err(LoccError::Parameter(format!("need n >= 4, got n={n}")));
    }
    let ket = |dim: usize, k: usize| basis_vec(dim, k);
    let e = |dim: usize, k: usize| proj(&ket(dim, k));
    let id2 = CMatrix::identity(2);

    let a1 = [(0, 0), (1, 0), (2, 0), (3, 1)]
        .iter()
        .fold(CMatrix::zeros(8, 8), |acc, &(r, x)| acc.add(&e(4, r).kron(&e(2, x))));
    let a2 = [(0, 1), (1, 1), (2, 1), (3, 0)]
        .iter()
        .fold(CMatrix::zeros(8, 8), |acc, &(r, x)| acc.add(&e(4, r).kron(&e(2, x))));

    // Bob's (n+1)-outcome measurement.
    let mut bob = Vec::new();
    for i in 1..n {
        let op = proj(&fourier_vec(n, 1..n, i)).kron(&e(2, 1));
        let child = if i <= n - 2 {
            ProtocolNode::Identify { label: tile(3, 0, i) }
        } else {
            ProtocolNode::Identify {
                label: StateLabel::Stopper,
            }
        };
        bob.push((op, child));
    }
    let b_n = e(n, n - 1).kron(&e(2, 0));
    bob.push((b_n, finish(Party::Alice, vec![tile(2, 1, 0), tile(2, 2, 0)])));
    let b_sum = bob.iter().fold(CMatrix::zeros(2 * n, 2 * n), |acc, (p, _)| acc.add(p));
    let b_last = CMatrix::identity(2 * n).sub(&b_sum);

    let a_n1_1 = e(4, 0).kron(&e(2, 0));
    let a_n1_2 = CMatrix::identity(8).sub(&a_n1_1);
    let b_n1_2_1 = e(n, 0).kron(&e(2, 0).add(&e(2, 1)));
    let b_n1_2_2 = CMatrix::identity(2 * n).sub(&b_n1_2_1);
    let plus = vec![ONE, ONE];
    let minus = vec![ONE, -ONE];
    let left = vec![tile(4, 1, 0), tile(4, 2, 0)];
    let bob_pm = branch(
        Party::Bob,
        vec![
            (
                CMatrix::identity(n).kron(&proj(&plus)),
                finish(Party::Alice, left.clone()),
            ),
            (CMatrix::identity(n).kron(&proj(&minus)), finish(Party::Alice, left)),
        ],
    );
    let mut one_two = ket(4, 1);
    one_two[2] = ONE;
    let a_c1 = proj(&one_two).kron(&id2);
    let a_c2 = CMatrix::identity(8).sub(&a_c1);
    let center = branch(
        Party::Alice,
        vec![
            (a_c1, finish(Party::Bob, (1..n - 2).map(|l| tile(5, 0, l)).collect())),
            (
                a_c2,
                ProtocolNode::OnePartyFinish {
                    party: Party::Bob,
                    candidates: (0..n - 2).map(|l| tile(5, 1, l)).collect(),
                },
            ),
        ],
    );
    let after_rest = branch(
        Party::Alice,
        vec![
            (a_n1_1, finish(Party::Bob, (1..n - 1).map(|l| tile(1, 0, l)).collect())),
            (a_n1_2, branch(Party::Bob, vec![(b_n1_2_1, bob_pm), (b_n1_2_2, center)])),
        ],
    );
    bob.push((b_last, after_rest));
    let sub_a1 = branch(Party::Bob, bob);

    let swap = |dim: usize| CMatrix::identity(dim).kron(&CMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]));
    let sub_a2 = conjugate(&sub_a1, &swap(4), &swap(n));
    Ok(Protocol {
        m: 4,
        n,
        resource_dim: 2,
        root: branch(Party::Alice, vec![(a1, sub_a1), (a2, sub_a2)]),
    })
}

/// `U P U†` for Alice's projectors and `V P V†` for Bob's, throughout a
/// tree without embeddings.
fn conjugate(node: &ProtocolNode, u: &CMatrix, v: &CMatrix) -> ProtocolNode {
    match node {
        ProtocolNode::Branch { party, outcomes } => {
            let w = match party {
                Party::Alice => u,
                Party::Bob => v,
            };
            ProtocolNode::Branch {
                party: *party,
                outcomes: outcomes
                    .iter()
                    .map(|o| Outcome {
                        projector: w.matmul(&o.projector).matmul(&w.adjoint()),
                        child: conjugate(&o.child, u, v),
                    })
                    .collect(),
            }
        }
        other => other.clone(),
    }
}

//! Running candidates through a protocol and checking every leaf.

use super::protocol::{Protocol, ProtocolNode};
use super::{Candidate, LoccError, Party};
use crate::exec::{map_indexed, Execution};
use crate::linalg::{norm_sqr, vdot, CMatrix};
use crate::state::StateLabel;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Branches whose squared norm falls below this fraction of the input's
/// are treated as unreachable.
pub const PRUNE_TOL: f64 = 1e-10;
const BRANCH_TOL: f64 = 1e-12;
const CONSERVATION_TOL: f64 = 1e-9;
const LEAF_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchDefect {
    /// Outcome indices from the root.
    pub path: Vec<usize>,
    pub completeness: f64,
    pub idempotence: f64,
    pub hermiticity: f64,
    pub cross_orthogonality: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Misidentification {
    pub state: StateLabel,
    pub path: Vec<usize>,
    pub probability: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafFailure {
    pub path: Vec<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateOutcome {
    pub label: StateLabel,
    pub success_probability: f64,
    pub leaves_reached: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationReport {
    pub m: usize,
    pub n: usize,
    pub resource_dim: usize,
    pub branch_count: usize,
    pub max_completeness_defect: f64,
    pub branch_violations: Vec<BranchDefect>,
    pub max_conservation_defect: f64,
    pub states: Vec<StateOutcome>,
    pub min_success_probability: f64,
    pub misidentifications: Vec<Misidentification>,
    pub leaf_failures: Vec<LeafFailure>,
    pub pass: bool,
}

/// Checks every branch of a materialized tree: the outcomes sum to the
/// identity and are Hermitian, idempotent and mutually orthogonal.
pub fn check_branches(protocol: &Protocol) -> Vec<BranchDefect> {
    let flat = protocol.materialized();
    let mut out = Vec::new();
    walk_branches(&flat.root, &mut Vec::new(), &mut out);
    out
}

fn walk_branches(node: &ProtocolNode, path: &mut Vec<usize>, out: &mut Vec<BranchDefect>) {
    let ProtocolNode::Branch { outcomes, .. } = node else {
        return;
    };
    let dim = outcomes.first().map_or(0, |o| o.projector.rows());
    let mut sum = CMatrix::zeros(dim, dim);
    let (mut idem, mut herm, mut cross) = (0.0f64, 0.0f64, 0.0f64);
    for (i, o) in outcomes.iter().enumerate() {
        let p = &o.projector;
        sum = sum.add(p);
        herm = herm.max(p.hermiticity_defect());
        idem = idem.max(p.matmul(p).max_abs_diff(p));
        for q in &outcomes[i + 1..] {
            cross = cross.max(p.matmul(&q.projector).max_abs());
        }
    }
    out.push(BranchDefect {
        path: path.clone(),
        completeness: sum.max_abs_diff(&CMatrix::identity(dim)),
        idempotence: idem,
        hermiticity: herm,
        cross_orthogonality: cross,
    });
    for (i, o) in outcomes.iter().enumerate() {
        path.push(i);
        walk_branches(&o.child, path, out);
        path.pop();
    }
}

impl BranchDefect {
    fn worst(&self) -> f64 {
        self.completeness
            .max(self.idempotence)
            .max(self.hermiticity)
            .max(self.cross_orthogonality)
    }
}

struct Arrival {
    path: Vec<usize>,
    state: CMatrix,
    probability: f64,
}

struct Traversal {
    arrivals: Vec<Arrival>,
    max_conservation_defect: f64,
}

fn apply(party: Party, p: &CMatrix, psi: &CMatrix) -> CMatrix {
    match party {
        Party::Alice => p.matmul(psi),
        Party::Bob => psi.matmul(&p.transpose()),
    }
}

fn traverse(root: &ProtocolNode, psi0: &CMatrix) -> Traversal {
    let n0 = psi0.frobenius_norm_sqr();
    let mut t = Traversal {
        arrivals: Vec::new(),
        max_conservation_defect: 0.0,
    };
    descend(root, psi0.clone(), n0, &mut Vec::new(), &mut t);
    t
}

fn descend(node: &ProtocolNode, psi: CMatrix, n0: f64, path: &mut Vec<usize>, t: &mut Traversal) {
    match node {
        ProtocolNode::Branch { party, outcomes } => {
            let incoming = psi.frobenius_norm_sqr();
            let posts: Vec<CMatrix> = outcomes.iter().map(|o| apply(*party, &o.projector, &psi)).collect();
            let total: f64 = posts.iter().map(CMatrix::frobenius_norm_sqr).sum();
            t.max_conservation_defect = t.max_conservation_defect.max((total - incoming).abs() / n0);
            for (i, (o, post)) in outcomes.iter().zip(posts).enumerate() {
                if post.frobenius_norm_sqr() / n0 < PRUNE_TOL {
                    continue;
                }
                path.push(i);
                descend(&o.child, post, n0, path, t);
                path.pop();
            }
        }
        ProtocolNode::Embedded { .. } => unreachable!("tree is materialized before traversal"),
        _ => {
            let probability = psi.frobenius_norm_sqr() / n0;
            t.arrivals.push(Arrival {
                path: path.clone(),
                state: psi,
                probability,
            });
        }
    }
}

fn leaf_at<'a>(root: &'a ProtocolNode, path: &[usize]) -> &'a ProtocolNode {
    path.iter().fold(root, |node, &i| match node {
        ProtocolNode::Branch { outcomes, .. } => &outcomes[i].child,
        _ => unreachable!("path follows branches"),
    })
}

/// Rank-one factors `Ψ ≈ α βᵀ` and the relative residual.
fn rank_one_factors(psi: &CMatrix) -> (Vec<Complex64>, Vec<Complex64>, f64) {
    let rows = psi.rows();
    let r = (0..rows)
        .max_by(|&a, &b| norm_sqr(psi.row(a)).total_cmp(&norm_sqr(psi.row(b))))
        .unwrap_or(0);
    let beta = psi.row(r).to_vec();
    let bb = norm_sqr(&beta);
    let conj_beta: Vec<Complex64> = beta.iter().map(|z| z.conj()).collect();
    let alpha: Vec<Complex64> = psi.mat_vec(&conj_beta).into_iter().map(|z| z / bb).collect();
    let approx = CMatrix::outer(&alpha, &beta);
    let residual = (psi.sub(&approx).frobenius_norm_sqr() / psi.frobenius_norm_sqr()).sqrt();
    (alpha, beta, residual)
}

fn cosine(u: &[Complex64], v: &[Complex64]) -> f64 {
    vdot(u, v).norm() / (norm_sqr(u) * norm_sqr(v)).sqrt()
}

/// Runs every candidate through `protocol` and checks the outcome.
///
/// A candidate's success probability is the total weight it brings to
/// leaves that end correctly: an identifying leaf reached by it alone and
/// carrying its label, or a finishing leaf whose survivors all satisfy the
/// finishing condition and are listed there.
pub fn verify_protocol(
    protocol: &Protocol,
    candidates: &[Candidate],
    exec: Execution,
) -> Result<DiscriminationReport, LoccError> {
    let (ad, bd) = (protocol.alice_dim(), protocol.bob_dim());
    for c in candidates {
        if (c.state.matrix.rows(), c.state.matrix.cols()) != (ad, bd) {
            return Err(LoccError::Malformed(format!(
                "candidate {:?} has registers {}x{}, protocol expects {ad}x{bd}",
                c.label,
                c.state.matrix.rows(),
                c.state.matrix.cols()
            )));
        }
    }
    check_shapes(&protocol.root, ad, bd)?;
    let flat = protocol.materialized();

    let defects = check_branches(protocol);
    let max_completeness_defect = defects.iter().map(|d| d.completeness).fold(0.0, f64::max);
    let branch_violations: Vec<BranchDefect> = defects.into_iter().filter(|d| d.worst() > BRANCH_TOL).collect();

    let traversals = map_indexed(candidates.len(), exec, |i| {
        traverse(&flat.root, &candidates[i].state.matrix)
    });
    let max_conservation_defect = traversals.iter().map(|t| t.max_conservation_defect).fold(0.0, f64::max);

    // Group arrivals by leaf.
    let mut by_leaf: BTreeMap<Vec<usize>, Vec<(usize, &Arrival)>> = BTreeMap::new();
    for (i, t) in traversals.iter().enumerate() {
        for a in &t.arrivals {
            by_leaf.entry(a.path.clone()).or_default().push((i, a));
        }
    }

    let mut success = vec![0.0f64; candidates.len()];
    let mut reached = vec![0usize; candidates.len()];
    let mut misidentifications = Vec::new();
    let mut leaf_failures = Vec::new();
    for (path, arrivals) in &by_leaf {
        for (i, _) in arrivals {
            reached[*i] += 1;
        }
        match leaf_at(&flat.root, path) {
            ProtocolNode::Identify { label } => {
                for (i, a) in arrivals {
                    let own = candidates[*i].label;
                    if own != *label {
                        misidentifications.push(Misidentification {
                            state: own,
                            path: path.clone(),
                            probability: a.probability,
                            detail: format!("reached a leaf identifying {label:?}"),
                        });
                    } else if arrivals.len() == 1 {
                        success[*i] += a.probability;
                    }
                }
            }
            ProtocolNode::OnePartyFinish {
                party,
                candidates: allowed,
            } => {
                let mut ok = true;
                for (i, a) in arrivals {
                    let own = candidates[*i].label;
                    if !allowed.contains(&own) {
                        ok = false;
                        misidentifications.push(Misidentification {
                            state: own,
                            path: path.clone(),
                            probability: a.probability,
                            detail: "survived at a finishing leaf that does not list it".into(),
                        });
                    }
                }
                if let Err(detail) = finishing_condition(*party, arrivals) {
                    ok = false;
                    leaf_failures.push(LeafFailure {
                        path: path.clone(),
                        detail,
                    });
                }
                if ok {
                    for (i, a) in arrivals {
                        success[*i] += a.probability;
                    }
                }
            }
            _ => unreachable!("arrivals only end at leaves"),
        }
    }

    let states: Vec<StateOutcome> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| StateOutcome {
            label: c.label,
            success_probability: success[i],
            leaves_reached: reached[i],
        })
        .collect();
    let min_success_probability = states
        .iter()
        .map(|s| s.success_probability)
        .fold(f64::INFINITY, f64::min);
    let min_success_probability = if states.is_empty() {
        1.0
    } else {
        min_success_probability
    };
    let pass = branch_violations.is_empty()
        && max_conservation_defect <= CONSERVATION_TOL
        && misidentifications.is_empty()
        && leaf_failures.is_empty()
        && states.iter().all(|s| (s.success_probability - 1.0).abs() <= LEAF_TOL);
    Ok(DiscriminationReport {
        m: protocol.m,
        n: protocol.n,
        resource_dim: protocol.resource_dim,
        branch_count: protocol.root.branch_count(),
        max_completeness_defect,
        branch_violations,
        max_conservation_defect,
        states,
        min_success_probability,
        misidentifications,
        leaf_failures,
        pass,
    })
}

/// Survivors must be product across the cut, parallel on the other party
/// and orthogonal on `party`.
fn finishing_condition(party: Party, arrivals: &[(usize, &Arrival)]) -> Result<(), String> {
    let mut factors = Vec::with_capacity(arrivals.len());
    for (i, a) in arrivals {
        let (alpha, beta, residual) = rank_one_factors(&a.state);
        if residual > LEAF_TOL.sqrt() {
            return Err(format!(
                "candidate #{i} is entangled across the cut (residual {residual:.3e})"
            ));
        }
        factors.push(match party {
            Party::Alice => (alpha, beta),
            Party::Bob => (beta, alpha),
        });
    }
    for x in 0..factors.len() {
        for y in x + 1..factors.len() {
            let (mx, ox) = &factors[x];
            let (my, oy) = &factors[y];
            if 1.0 - cosine(ox, oy) > LEAF_TOL {
                return Err(format!(
                    "candidates #{} and #{} differ on the non-measuring side",
                    arrivals[x].0, arrivals[y].0
                ));
            }
            if cosine(mx, my) > LEAF_TOL {
                return Err(format!(
                    "candidates #{} and #{} are not orthogonal on the measuring side",
                    arrivals[x].0, arrivals[y].0
                ));
            }
        }
    }
    Ok(())
}

fn check_shapes(node: &ProtocolNode, ad: usize, bd: usize) -> Result<(), LoccError> {
    if let ProtocolNode::Branch { party, outcomes } = node {
        if outcomes.is_empty() {
            return Err(LoccError::Malformed("branch without outcomes".into()));
        }
        let want = match party {
            Party::Alice => ad,
            Party::Bob => bd,
        };
        for o in outcomes {
            if o.projector.rows() != want || o.projector.cols() != want {
                return Err(LoccError::Malformed(format!(
                    "{party:?} projector is {}x{}, expected {want}x{want}",
                    o.projector.rows(),
                    o.projector.cols()
                )));
            }
            check_shapes(&o.child, ad, bd)?;
        }
    }
    if let ProtocolNode::Embedded { embedding, inner } = node {
        let fits = |map: &[usize], dim: usize| map.iter().all(|&k| k < dim);
        if !fits(&embedding.alice_map, ad) || !fits(&embedding.bob_map, bd) {
            return Err(LoccError::Malformed(format!(
                "embedding '{}' leaves the registers",
                embedding.description
            )));
        }
        check_shapes(inner, embedding.alice_map.len(), embedding.bob_map.len())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{attach_resource, build_lemma1_protocol, build_theorem3_protocol, candidates_for, Outcome};
    use super::*;
    use crate::families::prop2;
    use crate::state::build_upb;

    fn lemma1_inputs(n: usize) -> Vec<Candidate> {
        candidates_for(&build_upb(&prop2(4, n).unwrap(), true).unwrap(), 2)
    }

    #[test]
    fn lemma1_four_by_four_is_perfect() {
        let p = build_lemma1_protocol(4).unwrap();
        let r = verify_protocol(&p, &lemma1_inputs(4), Execution::Sequential).unwrap();
        assert!(r.pass, "{r:#?}");
        assert!((r.min_success_probability - 1.0).abs() < 1e-9);
        assert_eq!(r.states.len(), 12);
    }

    #[test]
    fn root_projectors_match_written_form() {
        let p = build_lemma1_protocol(4).unwrap();
        let ProtocolNode::Branch { outcomes, .. } = &p.root else {
            panic!()
        };
        // |00⟩, |10⟩, |20⟩, |31⟩ on A ⊗ a.
        assert_eq!(outcomes[0].projector, CMatrix::diagonal_projector(8, [0, 2, 4, 7]));
        let sum = outcomes[0].projector.add(&outcomes[1].projector);
        assert_eq!(sum, CMatrix::identity(8));
    }

    #[test]
    fn incomplete_root_is_reported() {
        let mut p = build_lemma1_protocol(4).unwrap();
        if let ProtocolNode::Branch { outcomes, .. } = &mut p.root {
            outcomes.pop();
        }
        let r = verify_protocol(&p, &lemma1_inputs(4), Execution::Sequential).unwrap();
        assert!(!r.pass);
        assert!(r
            .branch_violations
            .iter()
            .any(|d| d.path.is_empty() && d.completeness > 0.5));
    }

    #[test]
    fn swapped_labels_are_misidentified() {
        let mut inputs = lemma1_inputs(5);
        let (a, b) = (0, inputs.len() - 1);
        let tmp = inputs[a].label;
        inputs[a].label = inputs[b].label;
        inputs[b].label = tmp;
        let r = verify_protocol(&build_lemma1_protocol(5).unwrap(), &inputs, Execution::Sequential).unwrap();
        assert!(!r.pass);
        assert!(!r.misidentifications.is_empty());
    }

    #[test]
    fn second_root_outcome_is_ancilla_relabelled_first() {
        let p = build_lemma1_protocol(4).unwrap();
        let ProtocolNode::Branch { outcomes, .. } = &p.root else {
            panic!()
        };
        let x = CMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let sa = CMatrix::identity(4).kron(&x);
        let sb = CMatrix::identity(4).kron(&x);
        let upb = build_upb(&prop2(4, 4).unwrap(), true).unwrap();
        for s in attach_resource(&upb.states, 2) {
            let one = outcomes[0].projector.matmul(&s.matrix);
            let two = outcomes[1].projector.matmul(&s.matrix);
            let relabelled = sa.matmul(&one).matmul(&sb.transpose());
            assert!(relabelled.max_abs_diff(&two) < 1e-12);
        }
    }

    #[test]
    fn theorem3_matches_lemma1_for_four_rows() {
        for n in 4..=6 {
            let a = build_lemma1_protocol(n).unwrap().materialized();
            let b = build_theorem3_protocol(4, n).unwrap().materialized();
            assert!(super::super::equivalent(&a.root, &b.root, 1e-12), "n={n}");
        }
    }

    #[test]
    fn theorem3_six_rows_root() {
        let p = build_theorem3_protocol(6, 6).unwrap();
        assert_eq!(p.resource_dim, 3);
        let ProtocolNode::Branch { outcomes, .. } = &p.root else {
            panic!()
        };
        assert_eq!(outcomes.len(), 3);
        for o in outcomes {
            assert!((o.projector.trace().re - 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_rows_rejected() {
        assert!(matches!(build_theorem3_protocol(5, 6), Err(LoccError::Parameter(_))));
        assert!(build_lemma1_protocol(3).is_err());
    }

    #[test]
    fn wrong_shape_is_malformed() {
        let p = Protocol {
            m: 4,
            n: 4,
            resource_dim: 2,
            root: ProtocolNode::Branch {
                party: Party::Alice,
                outcomes: vec![Outcome {
                    projector: CMatrix::identity(3),
                    child: ProtocolNode::Identify {
                        label: StateLabel::Stopper,
                    },
                }],
            },
        };
        assert!(matches!(
            verify_protocol(&p, &lemma1_inputs(4), Execution::Sequential),
            Err(LoccError::Malformed(_))
        ));
    }
}

//! Numerical checks on sets of bipartite states and a seesaw search for
//! product vectors inside a subspace.
//!
//! The search maximizes `f(a, b) = ‖P(a ⊗ b)‖²` over unit vectors, where `P`
//! projects onto the span of an orthonormal family `{w}`. With `b` fixed the
//! objective is the quadratic form of the Hermitian matrix
//! `A(b)_{ik} = Σ_w conj(v_w[i]) v_w[k]`, `v_w = conj(W)·b`, so the optimal
//! `a` is its top eigenvector; the `b` step is symmetric. Each half-step is
//! an exact maximization, so the objective never decreases.

use crate::exec::{map_indexed, Execution};
use crate::linalg::{hermitian_eigh, norm_sqr, vdot, CMatrix, ONE, ZERO};
use crate::rect::{is_u_tile, RectError, UTileVerdict};
use crate::state::{matrix_rank, BipartiteState, ProductState, StateError, UpbSet};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default orthogonality tolerance.
pub const ORTHO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("input state {index} lies in the span of the preceding states")]
    Dependent { index: usize },
    #[error("complement vector {index} is not orthonormal to the others (defect {defect:e})")]
    NotOrthonormal { index: usize, defect: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub tol: f64,
    pub max_off_diagonal: f64,
    pub violations: Vec<Violation>,
}

impl OrthogonalityReport {
    pub fn is_orthogonal(&self) -> bool {
        self.violations.is_empty()
    }
}

fn common_dims(states: &[BipartiteState]) -> Result<(usize, usize), VerifyError> {
    let dims = states.first().map_or((0, 0), BipartiteState::dims);
    for s in states {
        if s.dims() != dims {
            return Err(StateError::DimensionMismatch {
                left: dims,
                right: s.dims(),
            }
            .into());
        }
    }
    Ok(dims)
}

/// Lists every pair `i < j` with `|⟨ψ_i|ψ_j⟩| > tol`.
pub fn check_orthogonal_set(states: &[BipartiteState], tol: f64) -> Result<OrthogonalityReport, VerifyError> {
    common_dims(states)?;
    let mut max_off_diagonal = 0.0f64;
    let mut violations = Vec::new();
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let magnitude = vdot(states[i].amplitudes(), states[j].amplitudes()).norm();
            max_off_diagonal = max_off_diagonal.max(magnitude);
            if magnitude > tol {
                violations.push(Violation { i, j, magnitude });
            }
        }
    }
    Ok(OrthogonalityReport {
        tol,
        max_off_diagonal,
        violations,
    })
}

/// Relative residual below which an input is treated as dependent.
const DEPENDENCE_TOL: f64 = 1e-10;

fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    // Two passes of modified Gram-Schmidt.
    for _ in 0..2 {
        for q in basis {
            let c = vdot(q, v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

fn normalize(v: &mut [Complex64]) {
    let nrm = norm_sqr(v).sqrt();
    for x in v.iter_mut() {
        *x /= nrm;
    }
}

/// An orthonormal basis of the orthogonal complement of `span(states)`.
///
/// The inputs are orthonormalized first; the complement is then completed
/// greedily from the standard basis, always taking the vector with the
/// largest residual.
pub fn complement_basis(states: &[BipartiteState]) -> Result<Vec<BipartiteState>, VerifyError> {
    let (m, n) = common_dims(states)?;
    if states.is_empty() {
        return Ok(Vec::new());
    }
    complement_in(m, n, states)
}

/// Same as [`complement_basis`] but also defined for an empty input, which
/// needs the ambient dimensions.
pub fn complement_in(m: usize, n: usize, states: &[BipartiteState]) -> Result<Vec<BipartiteState>, VerifyError> {
    for s in states {
        if s.dims() != (m, n) {
            return Err(StateError::DimensionMismatch {
                left: (m, n),
                right: s.dims(),
            }
            .into());
        }
    }
    let dim = m * n;
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for (index, s) in states.iter().enumerate() {
        let mut v = s.amplitudes().to_vec();
        let before = norm_sqr(&v).sqrt();
        orthogonalize(&mut v, &basis);
        if before == 0.0 || norm_sqr(&v).sqrt() < DEPENDENCE_TOL * before {
            return Err(VerifyError::Dependent { index });
        }
        normalize(&mut v);
        basis.push(v);
    }
    let start = basis.len();
    while basis.len() < dim {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for k in 0..dim {
            let mut v = vec![ZERO; dim];
            v[k] = ONE;
            orthogonalize(&mut v, &basis);
            let r = norm_sqr(&v);
            if best.as_ref().is_none_or(|(b, _)| r > *b) {
                best = Some((r, v));
            }
        }
        let (_, mut v) = best.expect("dim > 0");
        normalize(&mut v);
        basis.push(v);
    }
    Ok(basis
        .split_off(start)
        .into_iter()
        .map(|v| BipartiteState::from_amplitudes(m, n, v))
        .collect())
}

/// `‖x − Px‖ / ‖x‖` for `P` the projector onto the span of an orthonormal
/// family.
pub fn relative_residual(basis: &[BipartiteState], x: &BipartiteState) -> f64 {
    let mut v = x.amplitudes().to_vec();
    let before = norm_sqr(&v).sqrt();
    for w in basis {
        let c = vdot(w.amplitudes(), &v);
        for (y, q) in v.iter_mut().zip(w.amplitudes()) {
            *y -= c * q;
        }
    }
    norm_sqr(&v).sqrt() / before
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub conv_tol: f64,
    /// Overlap above which a product state counts as found.
    pub threshold: f64,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        SeesawConfig {
            restarts: 200,
            max_iters: 500,
            conv_tol: 1e-12,
            threshold: 1.0 - 1e-6,
            seed: 0,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_overlap: f64,
    /// Unit-normalized factors.
    pub best_product: ProductState,
    pub best_restart: usize,
    pub restarts_run: usize,
    pub converged_restarts: usize,
}

impl SearchResult {
    pub fn found(&self, threshold: f64) -> bool {
        self.best_overlap > threshold
    }
}

/// One restart's objective after every half-step, starting from the
/// initial point.
#[derive(Clone, Debug, PartialEq)]
pub struct RestartTrace {
    pub objective: Vec<f64>,
    pub converged: bool,
    pub product: ProductState,
}

/// Precomputed conjugated complement matrices.
struct Target {
    m: usize,
    n: usize,
    conj: Vec<CMatrix>,
}

impl Target {
    fn new(complement: &[BipartiteState]) -> Self {
        let (m, n) = complement.first().map_or((0, 0), BipartiteState::dims);
        let conj = complement
            .iter()
            .map(|w| {
                let mtx = w.matrix();
                CMatrix::from_fn(m, n, |i, j| mtx[(i, j)].conj())
            })
            .collect();
        Target { m, n, conj }
    }

    /// `Σ_w |⟨w|a⊗b⟩|²`.
    fn overlap(&self, a: &[Complex64], b: &[Complex64]) -> f64 {
        self.conj
            .iter()
            .map(|cw| {
                let v = cw.mat_vec(b);
                v.iter().zip(a).map(|(x, y)| x * y).sum::<Complex64>().norm_sqr()
            })
            .sum()
    }

    fn step_a(&self, b: &[Complex64]) -> Vec<Complex64> {
        let vs: Vec<Vec<Complex64>> = self.conj.iter().map(|cw| cw.mat_vec(b)).collect();
        top_vector(self.m, &vs)
    }

    fn step_b(&self, a: &[Complex64]) -> Vec<Complex64> {
        let us: Vec<Vec<Complex64>> = self.conj.iter().map(|cw| cw.transpose().mat_vec(a)).collect();
        top_vector(self.n, &us)
    }
}

fn top_vector(dim: usize, vs: &[Vec<Complex64>]) -> Vec<Complex64> {
    let h = CMatrix::from_fn(dim, dim, |i, k| vs.iter().map(|v| v[i].conj() * v[k]).sum());
    hermitian_eigh(&h).top().1
}

fn random_unit(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    normalize(&mut v);
    v
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn run_restart(target: &Target, cfg: &SeesawConfig, restart: usize) -> RestartTrace {
    let mut rng = restart_rng(cfg.seed, restart);
    let mut a = random_unit(&mut rng, target.m);
    let mut b = random_unit(&mut rng, target.n);
    let mut objective = vec![target.overlap(&a, &b)];
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let before = *objective.last().unwrap();
        a = target.step_a(&b);
        objective.push(target.overlap(&a, &b));
        b = target.step_b(&a);
        let after = target.overlap(&a, &b);
        objective.push(after);
        if after - before < cfg.conv_tol {
            converged = true;
            break;
        }
    }
    RestartTrace {
        objective,
        converged,
        product: ProductState::new(a, b).expect("unit factors"),
    }
}

/// Runs a single restart and returns its full objective trace.
pub fn seesaw_trace(complement: &[BipartiteState], cfg: &SeesawConfig, restart: usize) -> Option<RestartTrace> {
    if complement.is_empty() {
        return None;
    }
    Some(run_restart(&Target::new(complement), cfg, restart))
}

/// Best product-state overlap with the span of `complement` (orthonormal)
/// over `cfg.restarts` seeded restarts. An empty family yields overlap 0.
pub fn seesaw_search(complement: &[BipartiteState], cfg: &SeesawConfig) -> SearchResult {
    if complement.is_empty() {
        return SearchResult {
            best_overlap: 0.0,
            best_product: ProductState::basis(1, 1, 0, 0),
            best_restart: 0,
            restarts_run: 0,
            converged_restarts: 0,
        };
    }
    let target = Target::new(complement);
    let outcomes = map_indexed(cfg.restarts, cfg.execution, |r| {
        let t = run_restart(&target, cfg, r);
        (*t.objective.last().unwrap(), t.converged, t.product)
    });
    let converged_restarts = outcomes.iter().filter(|o| o.1).count();
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.0 > outcomes[best].0 {
            best = i;
        }
    }
    let (best_overlap, _, best_product) = outcomes.into_iter().nth(best).unwrap();
    SearchResult {
        best_overlap,
        best_product,
        best_restart: best,
        restarts_run: cfg.restarts,
        converged_restarts,
    }
}

/// The overlap of a product state with the span of an orthonormal family,
/// after normalizing the state.
pub fn product_overlap(complement: &[BipartiteState], p: &ProductState) -> f64 {
    if complement.is_empty() {
        return 0.0;
    }
    let u = p.normalized();
    Target::new(complement).overlap(u.a(), u.b())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpbCheckConfig {
    pub ortho_tol: f64,
    pub seesaw: SeesawConfig,
}

impl Default for UpbCheckConfig {
    fn default() -> Self {
        UpbCheckConfig {
            ortho_tol: ORTHO_TOL,
            seesaw: SeesawConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeesawVerdict {
    ProductStateFound,
    NoCertificateFound,
}

impl SeesawVerdict {
    pub fn describe(self) -> &'static str {
        match self {
            SeesawVerdict::ProductStateFound => "product state found in complement",
            SeesawVerdict::NoCertificateFound => "no certificate found (heuristic)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpbReport {
    pub config: UpbCheckConfig,
    pub m: usize,
    pub n: usize,
    pub tiles: usize,
    pub size: usize,
    pub expected_size: usize,
    pub orthogonality: OrthogonalityReport,
    /// Largest deviation from `⟨S|φ_i^{(0,0)}⟩ = |t_i|` and `⟨S|kept⟩ = 0`.
    pub stopper_law_defect: f64,
    pub complement_dim: usize,
    pub expected_complement_dim: usize,
    pub verdict: UTileVerdict,
    pub seesaw: SearchResult,
    pub seesaw_verdict: SeesawVerdict,
    pub seesaw_note: String,
    /// Rank of the best product's matrix, and its residual outside the
    /// complement, when the search found one.
    pub certificate_rank: Option<usize>,
    pub certificate_residual: Option<f64>,
    pub pass: bool,
}

/// Aggregated checks on a tile-derived candidate UPB. Passes exactly when
/// every structural check holds, the origin is U-tile and the seesaw finds
/// no product state in the complement.
pub fn check_upb(upb: &UpbSet, cfg: &UpbCheckConfig) -> Result<UpbReport, VerifyError> {
    let ts = &upb.origin;
    let (m, n, s) = (upb.m, upb.n, ts.tile_count());
    let states = upb.bipartite_states();
    let orthogonality = check_orthogonal_set(&states, cfg.ortho_tol)?;

    let stop = upb.stopper.to_state();
    let mut stopper_law_defect = 0.0f64;
    for (tile, miss) in ts.tiles().iter().zip(&upb.missing) {
        let ip = vdot(stop.amplitudes(), miss.to_state().amplitudes());
        stopper_law_defect = stopper_law_defect.max((ip - Complex64::new(tile.cell_count() as f64, 0.0)).norm());
    }
    for st in &states[..states.len() - 1] {
        stopper_law_defect = stopper_law_defect.max(vdot(stop.amplitudes(), st.amplitudes()).norm());
    }

    let complement = complement_in(m, n, &states)?;
    let verdict = is_u_tile(ts).map_err(|e: RectError| VerifyError::State(e.into()))?;
    let seesaw = seesaw_search(&complement, &cfg.seesaw);
    let found = seesaw.found(cfg.seesaw.threshold);
    let seesaw_verdict = if found {
        SeesawVerdict::ProductStateFound
    } else {
        SeesawVerdict::NoCertificateFound
    };
    let (certificate_rank, certificate_residual) = if found {
        let st = seesaw.best_product.to_state();
        (
            Some(matrix_rank(&st, 1e-8)),
            Some((1.0 - seesaw.best_overlap).max(0.0).sqrt()),
        )
    } else {
        (None, None)
    };

    let expected_size = m * n - s + 1;
    let pass = orthogonality.is_orthogonal()
        && upb.len() == expected_size
        && stopper_law_defect < 1e-9
        && complement.len() == s - 1
        && verdict.is_u_tile
        && !found;
    Ok(UpbReport {
        config: cfg.clone(),
        m,
        n,
        tiles: s,
        size: upb.len(),
        expected_size,
        orthogonality,
        stopper_law_defect,
        complement_dim: complement.len(),
        expected_complement_dim: s - 1,
        verdict,
        seesaw,
        seesaw_verdict,
        seesaw_note: seesaw_verdict.describe().to_string(),
        certificate_rank,
        certificate_residual,
        pass,
    })
}

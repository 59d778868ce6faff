//! The PPT state `ρ = (I − Σ|ψ̂_i⟩⟨ψ̂_i|) / (mn − |U|)` of a product basis.

use crate::linalg::{hermitian_eigh, CMatrix};
use crate::state::UpbSet;
use crate::verify::{check_orthogonal_set, VerifyError, ORTHO_TOL};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub dim_a: usize,
    pub dim_b: usize,
    /// Row-major over the joint index `i * dim_b + j`.
    pub matrix: CMatrix,
}

/// Normalized complement projector of `upb`. A complete basis has an empty
/// complement and yields the zero matrix.
pub fn build_ppt_state(upb: &UpbSet) -> Result<DensityMatrix, VerifyError> {
    let states = upb.bipartite_states();
    let ortho = check_orthogonal_set(&states, ORTHO_TOL)?;
    if let Some(v) = ortho.violations.first() {
        return Err(VerifyError::NotOrthonormal {
            index: v.j,
            defect: v.magnitude,
        });
    }
    let dim = upb.m * upb.n;
    let mut proj = CMatrix::identity(dim);
    for s in &states {
        proj = proj.sub(&CMatrix::rank_one_projector(s.amplitudes()));
    }
    let rank = dim - states.len();
    let matrix = if rank == 0 {
        CMatrix::zeros(dim, dim)
    } else {
        proj.scale(Complex64::new(1.0 / rank as f64, 0.0))
    };
    Ok(DensityMatrix {
        dim_a: upb.m,
        dim_b: upb.n,
        matrix,
    })
}

/// `(ρ^{T_B})_{(i,j),(k,l)} = ρ_{(i,l),(k,j)}`.
pub fn partial_transpose(rho: &DensityMatrix) -> DensityMatrix {
    let (da, db) = (rho.dim_a, rho.dim_b);
    let d = da * db;
    let matrix = CMatrix::from_fn(d, d, |r, c| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (c / db, c % db);
        rho.matrix[(i * db + l, k * db + j)]
    });
    DensityMatrix {
        dim_a: da,
        dim_b: db,
        matrix,
    }
}

/// Eigenvalues below this are counted in the zero cluster.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    pub m: usize,
    pub n: usize,
    pub upb_size: usize,
    pub trace: f64,
    pub hermiticity_defect: f64,
    pub rank: usize,
    pub expected_rank: usize,
    /// Smallest eigenvalue above `RANK_TOL` minus largest at or below it
    /// (in absolute value); absent if either cluster is empty.
    pub eigenvalue_gap: Option<f64>,
    pub min_eigenvalue: f64,
    pub min_eigenvalue_pt: f64,
    pub psd_tol: f64,
    pub ppt: bool,
    pub entangled_certificate: String,
    pub warnings: Vec<String>,
}

/// Spectrum of `ρ` and `ρ^{T_B}`. Entanglement is not tested here: when the
/// basis is unextendible, `ρ` is supported on a subspace without product
/// vectors, which the report records as the certificate's source.
pub fn ppt_report(upb: &UpbSet) -> Result<PptReport, VerifyError> {
    const PSD_TOL: f64 = -1e-10;
    let rho = build_ppt_state(upb)?;
    let eig = hermitian_eigh(&rho.matrix).values;
    let eig_pt = hermitian_eigh(&partial_transpose(&rho).matrix).values;
    let rank = eig.iter().filter(|&&x| x > RANK_TOL).count();
    let small = eig
        .iter()
        .filter(|&&x| x <= RANK_TOL)
        .map(|x| x.abs())
        .fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.max(x))));
    let large = eig
        .iter()
        .filter(|&&x| x > RANK_TOL)
        .copied()
        .fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.min(x))));
    let eigenvalue_gap = match (small, large) {
        (Some(s), Some(l)) => Some(l - s),
        _ => None,
    };
    let min_eigenvalue = eig.first().copied().unwrap_or(0.0);
    let min_eigenvalue_pt = eig_pt.first().copied().unwrap_or(0.0);
    let mut warnings = Vec::new();
    if rank == 0 {
        warnings.push("degenerate input: the states span the whole space, so the complement is empty".to_string());
    }
    let ppt = min_eigenvalue_pt >= PSD_TOL;
    Ok(PptReport {
        m: upb.m,
        n: upb.n,
        upb_size: upb.len(),
        trace: rho.matrix.trace().re,
        hermiticity_defect: rho.matrix.hermiticity_defect(),
        rank,
        expected_rank: upb.m * upb.n - upb.len(),
        eigenvalue_gap,
        min_eigenvalue,
        min_eigenvalue_pt,
        psd_tol: PSD_TOL,
        ppt,
        entangled_certificate: "inherited: rho is supported on the complement of the basis; if the basis is \
                                unextendible that range holds no product vector"
            .to_string(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::state::{build_upb, ProductState};

    #[test]
    fn example1_state() {
        let upb = build_upb(&families::example1(), true).unwrap();
        let r = ppt_report(&upb).unwrap();
        assert_eq!(r.rank, 5);
        assert!((r.trace - 1.0).abs() < 1e-12);
        assert!(r.min_eigenvalue_pt > -1e-10);
        assert!(r.ppt);
        let rho = build_ppt_state(&upb).unwrap();
        for s in &upb.states {
            let v = s.normalized().to_state();
            let amps = v.amplitudes();
            let rv = rho.matrix.mat_vec(amps);
            let q = crate::linalg::vdot(amps, &rv);
            assert!(q.norm() < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_fixes_product_and_is_involutive() {
        let upb = build_upb(&families::example1(), true).unwrap();
        let rho = build_ppt_state(&upb).unwrap();
        let back = partial_transpose(&partial_transpose(&rho));
        assert_eq!(back, rho);

        let p = ProductState::basis(2, 2, 0, 0).to_state();
        let pure = DensityMatrix {
            dim_a: 2,
            dim_b: 2,
            matrix: CMatrix::rank_one_projector(p.amplitudes()),
        };
        assert_eq!(partial_transpose(&pure), pure);
    }

    #[test]
    fn complete_basis_warns() {
        // The stopper is appended, but a single tile gives a full basis.
        let ts = crate::grid::parse_tile_grid("2 2\n1 1\n1 1\n").unwrap();
        let upb = build_upb(&ts, false).unwrap();
        let r = ppt_report(&upb).unwrap();
        assert_eq!(r.rank, 0);
        assert_eq!(r.warnings.len(), 1);
    }
}

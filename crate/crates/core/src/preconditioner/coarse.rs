use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_subdomain, HelmholtzParams};
use crate::decomposition::{Decomposition, Subdomain};
use crate::error::{check_len, Error, Result};
use crate::linalg::{factorize, generalized_eig, SparseFactorization, EIGEN_RESIDUAL_TOL};
use crate::mesh::{nodal_interpolation_matrix, MeshHierarchy, SimplicialMesh};
use crate::sparse::ComplexSparseMatrix;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseKind {
    Grid,
    Dtn,
}

/// Which DtN eigenpairs enter the coarse space, applied to eigenvalues
/// already sorted by real part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Every eigenvalue with `Re λ < k`.
    Automatic,
    /// The `m` eigenvalues of smallest real part.
    Fixed(usize),
    /// `Automatic`, truncated to at most `m_max`.
    Capped(usize),
}

impl SelectionPolicy {
    pub fn fixed(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("fixed selection needs m >= 1"));
        }
        Ok(Self::Fixed(m))
    }

    pub fn capped(m_max: usize) -> Result<Self> {
        if m_max == 0 {
            return Err(Error::invalid("capped selection needs m_max >= 1"));
        }
        Ok(Self::Capped(m_max))
    }

    /// Number of leading eigenvalues to keep.
    pub fn count(&self, sorted: &[C64], k: f64) -> usize {
        let below = sorted.iter().take_while(|l| l.re < k).count();
        match *self {
            Self::Automatic => below,
            Self::Fixed(m) => m.min(sorted.len()),
            Self::Capped(m) => below.min(m),
        }
    }
}

/// Coarse space data of one subdomain (DtN only).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SubdomainCoarseInfo {
    pub subdomain: usize,
    pub interface_size: usize,
    pub count: usize,
    /// Selected eigenvalues as `[re, im]`.
    pub eigenvalues: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoarseSummary {
    pub kind: CoarseKind,
    pub n_cs: usize,
    pub subdomains: Vec<SubdomainCoarseInfo>,
}

/// Columns `Z` of a coarse space with the Galerkin matrix `E = Z* A_ε Z`.
#[derive(Debug)]
pub struct CoarseSpace {
    kind: CoarseKind,
    z: ComplexSparseMatrix,
    z_adjoint: ComplexSparseMatrix,
    e: ComplexSparseMatrix,
    e_factor: SparseFactorization,
    per_subdomain: Vec<SubdomainCoarseInfo>,
}

impl CoarseSpace {
    /// Wraps a basis `Z` and factorizes `Z* A_ε Z`.
    pub fn from_basis(
        kind: CoarseKind,
        z: ComplexSparseMatrix,
        a_eps: &ComplexSparseMatrix,
    ) -> Result<Self> {
        check_len(a_eps.ncols(), z.nrows())?;
        if z.ncols() == 0 {
            return Err(Error::EmptyCoarseSpace);
        }
        let z_adjoint = z.conj_transpose();
        let e = z_adjoint.matmul(&a_eps.matmul(&z)?)?;
        let e_factor =
            factorize(&e).map_err(|err| Error::Factorization(format!("coarse matrix E: {err}")))?;
        Ok(Self {
            kind,
            z,
            z_adjoint,
            e,
            e_factor,
            per_subdomain: Vec::new(),
        })
    }

    pub fn kind(&self) -> CoarseKind {
        self.kind
    }

    pub fn z(&self) -> &ComplexSparseMatrix {
        &self.z
    }

    pub fn e(&self) -> &ComplexSparseMatrix {
        &self.e
    }

    pub fn size(&self) -> usize {
        self.z.ncols()
    }

    /// Selected eigenpair counts `m_i`, empty for the grid kind.
    pub fn per_subdomain_counts(&self) -> Vec<usize> {
        self.per_subdomain.iter().map(|s| s.count).collect()
    }

    pub fn per_subdomain(&self) -> &[SubdomainCoarseInfo] {
        &self.per_subdomain
    }

    /// `Ξ v = Z E⁻¹ Z* v`.
    pub fn correction(&self, v: &[C64]) -> Result<Vec<C64>> {
        let mut c = self.z_adjoint.mul_vec(v)?;
        self.e_factor.solve_in_place(&mut c)?;
        self.z.mul_vec(&c)
    }

    /// `Z* v`.
    pub fn restrict(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.z_adjoint.mul_vec(v)
    }

    /// Largest entrywise difference between `E` and a fresh `Z* A Z`.
    pub fn galerkin_defect(&self, a_eps: &ComplexSparseMatrix) -> Result<f64> {
        let fresh = self.z_adjoint.matmul(&a_eps.matmul(&self.z)?)?;
        self.e.max_abs_diff(&fresh)
    }

    pub fn summary(&self) -> CoarseSummary {
        CoarseSummary {
            kind: self.kind,
            n_cs: self.size(),
            subdomains: self.per_subdomain.clone(),
        }
    }
}

/// Coarse space of P1 functions on the coarse mesh of `hierarchy`.
pub fn build_grid_cs(
    hierarchy: &MeshHierarchy,
    a_eps: &ComplexSparseMatrix,
) -> Result<CoarseSpace> {
    let z = nodal_interpolation_matrix(hierarchy)?;
    CoarseSpace::from_basis(CoarseKind::Grid, z, a_eps)
}

/// Selected, extended and weighted eigenvectors of one subdomain.
struct LocalBlock {
    info: SubdomainCoarseInfo,
    /// Column-major, `num_dofs × count`, in local numbering.
    columns: Mat<C64>,
}

fn dtn_block(
    mesh: &SimplicialMesh,
    sub: &Subdomain,
    weights: &[f64],
    params: &HelmholtzParams,
    selection: SelectionPolicy,
) -> Result<LocalBlock> {
    let gamma = sub.interface_dofs();
    let inner = sub.interior_dofs();
    let mut info = SubdomainCoarseInfo {
        subdomain: sub.index(),
        interface_size: gamma.len(),
        ..Default::default()
    };
    if gamma.is_empty() {
        return Ok(LocalBlock {
            info,
            columns: Mat::zeros(sub.num_dofs(), 0),
        });
    }
    let mats = assemble_subdomain(mesh, sub, params)?;
    let a = &mats.a_neu;
    let a_ii = factorize(&a.submatrix(inner, inner)?)?;
    // X = A_II⁻¹ A_IΓ, one column per interface dof
    let mut x = a.submatrix(inner, gamma)?.to_faer_dense();
    a_ii.solve_columns(x.as_mut());
    let a_gi = a.submatrix(gamma, inner)?.to_faer_dense();
    let s = a.submatrix(gamma, gamma)?.to_faer_dense() - &a_gi * &x;
    let m = mats.m_interface.submatrix(gamma, gamma)?.to_faer_dense();

    let pairs = generalized_eig(&s, &m)?;
    pairs.check_residuals(&s, &m, EIGEN_RESIDUAL_TOL)?;
    let count = selection.count(&pairs.values, params.k);
    info.count = count;
    info.eigenvalues = pairs.values[..count].iter().map(|l| [l.re, l.im]).collect();

    let g = pairs.vectors.subcols(0, count);
    let interior_part = &x * g;
    let mut columns = Mat::<C64>::zeros(sub.num_dofs(), count);
    for c in 0..count {
        for (r, &l) in inner.iter().enumerate() {
            columns[(l, c)] = -interior_part[(r, c)] * weights[l];
        }
        for (r, &l) in gamma.iter().enumerate() {
            columns[(l, c)] = g[(r, c)] * weights[l];
        }
    }
    Ok(LocalBlock { info, columns })
}

/// Spectral coarse space from the interface eigenproblems
/// `(A_ΓΓ − A_ΓI A_II⁻¹ A_IΓ) g = λ M_Γ g` of every subdomain, with the
/// local matrices built for `params`. `a_eps` defines `E`.
pub fn build_dtn_cs(
    mesh: &SimplicialMesh,
    decomposition: &Decomposition,
    params: &HelmholtzParams,
    selection: SelectionPolicy,
    a_eps: &ComplexSparseMatrix,
) -> Result<CoarseSpace> {
    check_len(mesh.num_vertices(), decomposition.num_global_dofs())?;
    let blocks = decomposition
        .subdomains()
        .par_iter()
        .map(|sub| {
            dtn_block(
                mesh,
                sub,
                decomposition.pou_weights(sub.index()),
                params,
                selection,
            )
            .map_err(|e| e.in_subdomain(sub.index()))
        })
        .collect::<Result<Vec<_>>>()?;

    let n_cs: usize = blocks.iter().map(|b| b.info.count).sum();
    if n_cs == 0 {
        return Err(Error::EmptyCoarseSpace);
    }
    let mut triplets = Vec::new();
    let mut col = 0;
    for (block, sub) in blocks.iter().zip(decomposition.subdomains()) {
        for c in 0..block.info.count {
            for (l, &g) in sub.dofs().iter().enumerate() {
                let v = block.columns[(l, c)];
                if v != C64::new(0.0, 0.0) {
                    triplets.push((g, col, v));
                }
            }
            col += 1;
        }
    }
    let z = ComplexSparseMatrix::from_triplets(decomposition.num_global_dofs(), n_cs, &triplets)?;
    let mut space = CoarseSpace::from_basis(CoarseKind::Dtn, z, a_eps)?;
    space.per_subdomain = blocks.into_iter().map(|b| b.info).collect();
    Ok(space)
}

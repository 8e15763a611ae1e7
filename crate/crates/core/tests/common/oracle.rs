//! Dense reference preconditioners on the toy problem.

use faer::Mat;
use helmdd::assembly::{assemble_subdomain, HelmholtzParams};
use helmdd::decomposition::Decomposition;
use helmdd::mesh::SimplicialMesh;
use helmdd::preconditioner::{CoarseMode, CoarseSpace};
use helmdd::C64;

use super::*;

/// d = 2, m = 8, two subdomains per axis, k = 4, ε = k.
pub struct Toy {
    pub mesh: SimplicialMesh,
    pub k: f64,
    pub eps: f64,
}

impl Toy {
    pub fn new() -> Self {
        Self {
            mesh: SimplicialMesh::uniform(2, 8).unwrap(),
            k: 4.0,
            eps: 4.0,
        }
    }

    pub fn params(&self) -> HelmholtzParams {
        HelmholtzParams::new(self.k, self.eps)
    }
}

pub fn to_mat(a: &Dense) -> Mat<C64> {
    Mat::from_fn(a.len(), a[0].len(), |i, j| a[i][j])
}

/// Σ_j R_jᵀ D_j A_j⁻¹ R_j with every factor formed densely.
pub fn dense_one_level(toy: &Toy, dec: &Decomposition) -> Dense {
    let n = toy.mesh.num_vertices();
    let params = toy.params();
    let mut m1 = zeros(n, n);
    for j in 0..dec.num_subdomains() {
        let sub = dec.subdomain(j);
        let nj = sub.num_dofs();
        let mut r = zeros(nj, n);
        for (l, &g) in sub.dofs().iter().enumerate() {
            r[l][g] = c(1.0, 0.0);
        }
        let mut d = zeros(nj, nj);
        for (l, &w) in dec.pou_weights(j).iter().enumerate() {
            d[l][l] = c(w, 0.0);
        }
        let aj = dense(&assemble_subdomain(&toy.mesh, sub, &params).unwrap().a_local);
        let term = matmul(&adjoint(&r), &matmul(&d, &matmul(&inverse(&aj), &r)));
        m1 = add(&m1, &term, c(1.0, 0.0));
    }
    m1
}

pub fn dense_two_level(m1: &Dense, a: &Dense, coarse: &CoarseSpace, mode: CoarseMode) -> Dense {
    let n = a.len();
    let z = dense(coarse.z());
    let zh = adjoint(&z);
    let e = matmul(&zh, &matmul(a, &z));
    let xi = matmul(&z, &matmul(&inverse(&e), &zh));
    match mode {
        CoarseMode::Additive => add(m1, &xi, c(1.0, 0.0)),
        CoarseMode::Hybrid => {
            let p = add(&eye(n), &matmul(a, &xi), c(-1.0, 0.0));
            let q = add(&eye(n), &matmul(&xi, a), c(-1.0, 0.0));
            add(&matmul(&q, &matmul(m1, &p)), &xi, c(1.0, 0.0))
        }
    }
}

/// Largest of max|apply(v) - op v| / max(1, max|op v|) over 10 random vectors.
pub fn operator_mismatch(dense_op: &Dense, apply: impl Fn(&[C64]) -> Vec<C64>) -> f64 {
    (0..10)
        .map(|seed| {
            let v = random_vector(dense_op.len(), 100 + seed);
            let expected = matvec(dense_op, &v);
            let scale = expected.iter().map(|x| x.norm()).fold(1.0, f64::max);
            max_diff(&apply(&v), &expected) / scale
        })
        .fold(0.0, f64::max)
}

/// Max difference between `factorize` and Gauss-Jordan on a random 50×50 system.
pub fn lu_mismatch() -> f64 {
    let a = random_sparse(50, 4, 11);
    let b = random_vector(50, 12);
    let x = helmdd::linalg::factorize(&a).unwrap().solve(&b).unwrap();
    let bcol: Dense = b.iter().map(|&v| vec![v]).collect();
    let oracle: Vec<C64> = solve_dense(&dense(&a), &bcol)
        .into_iter()
        .map(|r| r[0])
        .collect();
    max_diff(&x, &oracle)
}

pub struct PencilCheck {
    pub count: usize,
    /// max |det(S - λM)| / (1e-6 ‖S‖_F⁸); at most 1 when every λ is a root.
    pub det_ratio: f64,
    pub max_residual: f64,
    pub sorted: bool,
}

/// `generalized_eig` on a random 8×8 pencil with M Hermitian positive definite.
pub fn pencil_check() -> PencilCheck {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let n = 8;
    let mut rand_dense = || -> Dense {
        (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect()
            })
            .collect()
    };
    let s = rand_dense();
    let b = rand_dense();
    let m = add(&matmul(&adjoint(&b), &b), &eye(n), c(1.0, 0.0));
    let pairs = helmdd::linalg::generalized_eig(&to_mat(&s), &to_mat(&m)).unwrap();
    let bound = 1e-6 * frobenius(&s).powi(8);
    let det_ratio = pairs
        .values
        .iter()
        .map(|&l| det(&add(&s, &m, -l)).norm() / bound)
        .fold(0.0, f64::max);
    PencilCheck {
        count: pairs.len(),
        det_ratio,
        max_residual: pairs
            .relative_residuals(&to_mat(&s), &to_mat(&m))
            .into_iter()
            .fold(0.0, f64::max),
        sorted: pairs.values.windows(2).all(|w| w[0].re <= w[1].re),
    }
}

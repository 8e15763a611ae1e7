//! Numerical kernels: sparse direct solves, GMRES, dense generalized
//! eigenproblems and the seeded start vectors.

mod eig;
mod gmres;
mod lu;
mod rng;
pub mod vector;

pub use eig::{generalized_eig, EigenPairs, EIGEN_RESIDUAL_TOL};
pub use gmres::{
    gmres, GmresOptions, GmresOutcome, Identity, LinearOperator, ResidualNorm, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
pub use lu::{factorize, SparseFactorization};
pub use rng::random_initial_guess;

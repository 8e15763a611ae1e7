//! Sparse direct solves, backed by faer's supernodal LU with partial pivoting.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, NumericLu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::{Conj, MatMut, Par};
use num_complex::Complex64 as C64;

use crate::error::{check_len, Error, Result};
use crate::sparse::ComplexSparseMatrix;

/// Reusable LU factorization of a square complex sparse matrix.
///
/// Factorization and solves run single-threaded: callers parallelize across
/// independent factorizations instead, which keeps results reproducible.
pub struct SparseFactorization {
    symbolic: SymbolicLu<usize>,
    numeric: NumericLu<usize, C64>,
    n: usize,
}

impl std::fmt::Debug for SparseFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseFactorization")
            .field("n", &self.n)
            .finish()
    }
}

/// Factorizes `a`; fails on structurally or numerically zero pivots.
pub fn factorize(a: &ComplexSparseMatrix) -> Result<SparseFactorization> {
    if a.nrows() != a.ncols() {
        return Err(Error::invalid(format!(
            "cannot factorize a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let csc = a.to_faer_csc()?;
    let symbolic = factorize_symbolic_lu(csc.symbolic(), Default::default())
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let mut numeric = NumericLu::new();
    let par = Par::Seq;
    let mut buf =
        MemBuffer::try_new(symbolic.factorize_numeric_lu_scratch::<C64>(par, Default::default()))
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    symbolic
        .factorize_numeric_lu(
            &mut numeric,
            csc.as_ref(),
            par,
            MemStack::new(&mut buf),
            Default::default(),
        )
        .map_err(|e| match e {
            LuError::SymbolicSingular { index } => Error::SingularPivot { index },
            LuError::Generic(g) => Error::Factorization(format!("{g:?}")),
        })?;
    let f = SparseFactorization {
        symbolic,
        numeric,
        n,
    };
    // faer only stops on exactly-zero pivots; tiny ones surface as non-finite solves
    let probe = f.solve(&vec![C64::new(1.0, 0.0); n])?;
    if let Some(index) = probe
        .iter()
        .position(|x| !x.re.is_finite() || !x.im.is_finite())
    {
        return Err(Error::SingularPivot { index });
    }
    Ok(f)
}

impl SparseFactorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [C64]) -> Result<()> {
        check_len(self.n, x.len())?;
        let n = self.n;
        self.solve_columns(faer::MatMut::from_column_major_slice_mut(x, n, 1));
        Ok(())
    }

    /// Solves for several right-hand sides stored as the columns of `rhs`.
    pub fn solve_columns(&self, rhs: MatMut<'_, C64>) {
        let par = Par::Seq;
        let lu = faer::sparse::linalg::lu::LuRef::<'_, usize, C64>::new_unchecked(
            &self.symbolic,
            &self.numeric,
        );
        let mut buf = MemBuffer::new(
            self.symbolic
                .solve_in_place_scratch::<C64>(rhs.ncols(), par),
        );
        lu.solve_in_place_with_conj(Conj::No, rhs, par, MemStack::new(&mut buf));
    }
}

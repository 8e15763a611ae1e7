//! Dense generalized eigenproblems `S v = λ M v` with Hermitian positive definite `M`.
//!
//! `M = L L*` is factored by Cholesky, the standard problem for
//! `C = L⁻¹ S L⁻*` is solved with faer's complex QR algorithm, and the
//! eigenvectors are mapped back as `v = L⁻* w` with `v* M v = 1`.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{evd_cplx, evd_scratch, ComputeEigenvectors};
use faer::{Mat, Par};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative eigen-residual bound accepted for every pair.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// Eigenvalues sorted by ascending real part (ties: imaginary part, then
/// original position) with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<C64>,
    pub vectors: Mat<C64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `‖S v_j − λ_j M v_j‖ / (‖S‖_F + |λ_j| ‖M‖_F)` for every pair.
    pub fn relative_residuals(&self, s: &Mat<C64>, m: &Mat<C64>) -> Vec<f64> {
        let s_norm = s.norm_l2();
        let m_norm = m.norm_l2();
        let sv = s * &self.vectors;
        let mv = m * &self.vectors;
        (0..self.len())
            .map(|j| {
                let lambda = self.values[j];
                let r: f64 = (0..s.nrows())
                    .map(|i| (sv[(i, j)] - lambda * mv[(i, j)]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                r / (s_norm + lambda.norm() * m_norm)
            })
            .collect()
    }

    /// Fails with [`Error::EigenResidual`] if any pair exceeds `tol`.
    pub fn check_residuals(&self, s: &Mat<C64>, m: &Mat<C64>, tol: f64) -> Result<()> {
        for (pair, residual) in self.relative_residuals(s, m).into_iter().enumerate() {
            if !(residual <= tol) {
                return Err(Error::EigenResidual {
                    pair,
                    residual,
                    tolerance: tol,
                });
            }
        }
        Ok(())
    }
}

/// In-place lower Cholesky factor of a Hermitian positive definite matrix.
fn cholesky(m: &Mat<C64>) -> Result<Mat<C64>> {
    let n = m.nrows();
    let scale = m.norm_l2().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in 0..=i {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-12 * scale {
                return Err(Error::NotPositiveDefinite);
            }
        }
    }
    let mut l = Mat::<C64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 1e-14 * scale) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = d.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut acc = m[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / d;
        }
    }
    Ok(l)
}

/// Overwrites `b` with `L⁻¹ b` column by column.
fn forward_substitute(l: &Mat<C64>, b: &mut Mat<C64>) {
    let n = l.nrows();
    for c in 0..b.ncols() {
        for i in 0..n {
            let mut acc = b[(i, c)];
            for k in 0..i {
                acc -= l[(i, k)] * b[(k, c)];
            }
            b[(i, c)] = acc / l[(i, i)];
        }
    }
}

/// Overwrites `b` with `L⁻* b`.
fn backward_substitute_adjoint(l: &Mat<C64>, b: &mut Mat<C64>) {
    let n = l.nrows();
    for c in 0..b.ncols() {
        for i in (0..n).rev() {
            let mut acc = b[(i, c)];
            for k in i + 1..n {
                acc -= l[(k, i)].conj() * b[(k, c)];
            }
            b[(i, c)] = acc / l[(i, i)].conj();
        }
    }
}

/// All eigenpairs of `S v = λ M v`.
pub fn generalized_eig(s: &Mat<C64>, m: &Mat<C64>) -> Result<EigenPairs> {
    let n = s.nrows();
    if s.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::invalid(
            "eigenproblem matrices must be square and of equal size",
        ));
    }
    if n == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        });
    }
    let l = cholesky(m)?;
    // C = L⁻¹ S L⁻*: Y = L⁻¹ S, then C = (L⁻¹ Y*)*
    let mut y = s.clone();
    forward_substitute(&l, &mut y);
    let mut yt = y.adjoint().to_owned();
    forward_substitute(&l, &mut yt);
    let c = yt.adjoint().to_owned();

    let par = Par::Seq;
    let mut w = Mat::<C64>::zeros(n, n);
    let mut lambda = Diag::<C64>::zeros(n);
    let mut buf = MemBuffer::new(evd_scratch::<C64>(
        n,
        ComputeEigenvectors::No,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    ));
    evd_cplx(
        c.as_ref(),
        lambda.as_mut(),
        None,
        Some(w.as_mut()),
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Eigen(format!("{e:?}")))?;

    let mut vectors = w;
    backward_substitute_adjoint(&l, &mut vectors);
    let values: Vec<C64> = lambda.column_vector().iter().copied().collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .re
            .total_cmp(&values[b].re)
            .then(values[a].im.total_cmp(&values[b].im))
            .then(a.cmp(&b))
    });
    let mut sorted = Mat::<C64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        // normalize in the M-inner product
        let col = vectors.col(src);
        let mv = m * col;
        let mnorm = col.adjoint() * &mv;
        let scale = 1.0 / mnorm.re.max(f64::MIN_POSITIVE).sqrt();
        for i in 0..n {
            sorted[(i, dst)] = vectors[(i, src)] * scale;
        }
    }
    Ok(EigenPairs {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: sorted,
    })
}

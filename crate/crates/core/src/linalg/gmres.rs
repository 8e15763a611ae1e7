//! Full (unrestarted) GMRES with right preconditioning.

use num_complex::Complex64 as C64;

use super::vector::{axpy, dot, norm, scale};
use crate::error::{check_len, Result};
use crate::sparse::ComplexSparseMatrix;

/// Default cap on Arnoldi steps; counts above it are reported as non-convergence.
pub const DEFAULT_MAX_ITER: usize = 500;
/// Default relative-residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-6;

/// A linear map on complex `n`-vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Result<Vec<C64>>;
}

impl LinearOperator for ComplexSparseMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.mul_vec(x)
    }
}

/// The identity on `C^n`.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.0, x.len())?;
        Ok(x.to_vec())
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        (**self).apply(x)
    }
}

/// What the residual norm is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualNorm {
    /// `‖b − A x‖ / ‖b‖`.
    #[default]
    Rhs,
    /// `‖b − A x‖ / ‖b − A x₀‖`.
    InitialResidual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub residual_norm: ResidualNorm,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            residual_norm: ResidualNorm::Rhs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<C64>,
    /// Arnoldi steps performed.
    pub iterations: usize,
    /// Relative residual after 0, 1, … steps, from the least-squares problem.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// The Krylov space became invariant before the tolerance was met.
    pub breakdown: bool,
    /// `‖b‖`.
    pub rhs_norm: f64,
    /// `‖b − A x₀‖`.
    pub initial_residual_norm: f64,
}

impl GmresOutcome {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }

    /// First step whose residual is at most `tol` under `norm`.
    ///
    /// Unrestarted GMRES iterates do not depend on the stopping rule, so this
    /// is the count a run stopped by `(tol, norm)` would report, provided the
    /// run went at least that far.
    pub fn steps_to(&self, tol: f64, norm: ResidualNorm) -> Option<usize> {
        let target = match norm {
            ResidualNorm::Rhs => self.rhs_norm,
            ResidualNorm::InitialResidual => self.initial_residual_norm,
        };
        let reference = self.reference_norm();
        if target == 0.0 {
            return self.residual_history.iter().position(|&h| h == 0.0);
        }
        self.residual_history
            .iter()
            .position(|&h| h * reference <= tol * target)
    }

    /// The norm the history is relative to.
    fn reference_norm(&self) -> f64 {
        match self.residual_history.first() {
            Some(&h0) if h0 > 0.0 => self.initial_residual_norm / h0,
            _ => self.rhs_norm,
        }
    }
}

/// Solves `A x = b` by GMRES on `A M⁻¹ y = b`, `x = M⁻¹ y`, from `x0`.
///
/// Orthogonalization is modified Gram–Schmidt with a second pass when the new
/// vector loses more than two orders of magnitude in norm.
pub fn gmres(
    a: &dyn LinearOperator,
    b: &[C64],
    m_inv: &dyn LinearOperator,
    x0: &[C64],
    options: &GmresOptions,
) -> Result<GmresOutcome> {
    let n = a.dim();
    check_len(n, b.len())?;
    check_len(n, x0.len())?;
    check_len(n, m_inv.dim())?;
    if !(options.tol > 0.0) {
        return Err(crate::Error::invalid(format!(
            "tolerance must be positive, got {}",
            options.tol
        )));
    }
    let zero = C64::new(0.0, 0.0);

    let ax0 = a.apply(x0)?;
    let r0: Vec<C64> = b.iter().zip(&ax0).map(|(bi, ai)| bi - ai).collect();
    let beta = norm(&r0);
    let reference = match options.residual_norm {
        ResidualNorm::Rhs => norm(b),
        ResidualNorm::InitialResidual => beta,
    };
    if reference == 0.0 || beta == 0.0 {
        // b = 0 (or x0 already exact): the answer is x0 when beta = 0, else 0
        let solution = if beta == 0.0 {
            x0.to_vec()
        } else {
            vec![zero; n]
        };
        return Ok(GmresOutcome {
            solution,
            iterations: 0,
            residual_history: vec![0.0],
            converged: true,
            breakdown: false,
            rhs_norm: norm(b),
            initial_residual_norm: beta,
        });
    }
    let mut history = vec![beta / reference];
    if beta / reference <= options.tol {
        return Ok(GmresOutcome {
            solution: x0.to_vec(),
            iterations: 0,
            residual_history: history,
            converged: true,
            breakdown: false,
            rhs_norm: norm(b),
            initial_residual_norm: beta,
        });
    }

    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut v0 = r0;
    scale(C64::new(1.0 / beta, 0.0), &mut v0);
    basis.push(v0);
    // Hessenberg columns after rotation, i.e. the triangular factor R
    let mut r_cols: Vec<Vec<C64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<C64> = Vec::new();
    let mut g = vec![C64::new(beta, 0.0)];
    let mut converged = false;
    let mut breakdown = false;

    for j in 0..options.max_iter {
        let z = m_inv.apply(&basis[j])?;
        let mut w = a.apply(&z)?;
        let w_norm = norm(&w);
        let mut h = vec![zero; j + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = dot(v, &w);
            axpy(-hij, v, &mut w);
            h[i] = hij;
        }
        let mut h_next = norm(&w);
        if h_next < w_norm / 100.0 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
                h[i] += c;
            }
            h_next = norm(&w);
        }
        h[j + 1] = C64::new(h_next, 0.0);

        for i in 0..j {
            let t = cs[i] * h[i] + sn[i] * h[i + 1];
            h[i + 1] = -sn[i].conj() * h[i] + cs[i] * h[i + 1];
            h[i] = t;
        }
        let (c, s, r) = givens(h[j], h[j + 1]);
        h[j] = r;
        h[j + 1] = zero;
        cs.push(c);
        sn.push(s);
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s.conj() * gj);
        h.truncate(j + 1);
        r_cols.push(h);

        let rel = g[j + 1].norm() / reference;
        history.push(rel);
        if rel <= options.tol {
            converged = true;
            break;
        }
        if h_next <= 1e-14 * w_norm.max(f64::MIN_POSITIVE) {
            breakdown = true;
            break;
        }
        scale(C64::new(1.0 / h_next, 0.0), &mut w);
        basis.push(w);
    }

    let steps = r_cols.len();
    // back substitution R y = g
    let mut y = vec![zero; steps];
    for i in (0..steps).rev() {
        let mut acc = g[i];
        for (k, yk) in y.iter().enumerate().skip(i + 1) {
            acc -= r_cols[k][i] * yk;
        }
        y[i] = acc / r_cols[i][i];
    }
    let mut update = vec![zero; n];
    for (v, yi) in basis.iter().zip(&y) {
        axpy(*yi, v, &mut update);
    }
    let correction = m_inv.apply(&update)?;
    let solution: Vec<C64> = x0.iter().zip(&correction).map(|(x, d)| x + d).collect();

    if breakdown && !converged {
        let ax = a.apply(&solution)?;
        let true_res: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        converged = norm(&true_res) / reference <= options.tol;
    }

    Ok(GmresOutcome {
        solution,
        iterations: steps,
        residual_history: history,
        converged,
        breakdown,
        rhs_norm: norm(b),
        initial_residual_norm: beta,
    })
}

/// Complex Givens rotation with `[c s; -s̄ c] [a; b] = [r; 0]`, `c` real.
fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    if b.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0), a);
    }
    if a.norm() == 0.0 {
        // rotate b into the first slot
        let s = b.conj() / b.norm();
        return (0.0, s, C64::new(b.norm(), 0.0));
    }
    let an = a.norm();
    let t = an.hypot(b.norm());
    let c = an / t;
    let phase = a / an;
    let s = phase * b.conj() / t;
    (c, s, phase * t)
}

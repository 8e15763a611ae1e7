use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::linalg::LinearOperator;
use crate::sparse::ComplexSparseMatrix;
use crate::C64;

use super::{CoarseSpace, OneLevelOras};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseMode {
    /// `M₁⁻¹ + Ξ`.
    Additive,
    /// `Q M₁⁻¹ P + Ξ` with `P = I − AΞ`, `Q = I − ΞA`.
    #[default]
    Hybrid,
}

/// One-level ORAS combined with a coarse correction `Ξ = Z E⁻¹ Z*`.
#[derive(Debug)]
pub struct TwoLevelPreconditioner {
    one_level: OneLevelOras,
    coarse: CoarseSpace,
    mode: CoarseMode,
    /// Matrix used in `P` and `Q`; must be the one `E` was built from.
    a_eps: ComplexSparseMatrix,
}

impl TwoLevelPreconditioner {
    pub fn new(
        one_level: OneLevelOras,
        coarse: CoarseSpace,
        mode: CoarseMode,
        a_eps: ComplexSparseMatrix,
    ) -> Result<Self> {
        let n = one_level.dim();
        check_len(n, coarse.z().nrows())?;
        check_len(n, a_eps.nrows())?;
        Ok(Self {
            one_level,
            coarse,
            mode,
            a_eps,
        })
    }

    pub fn one_level(&self) -> &OneLevelOras {
        &self.one_level
    }

    pub fn coarse(&self) -> &CoarseSpace {
        &self.coarse
    }

    pub fn mode(&self) -> CoarseMode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: CoarseMode) {
        self.mode = mode;
    }

    pub fn a_eps(&self) -> &ComplexSparseMatrix {
        &self.a_eps
    }

    /// `P w = w − A Ξ w`.
    pub fn project_p(&self, w: &[C64]) -> Result<Vec<C64>> {
        let aw = self.a_eps.mul_vec(&self.coarse.correction(w)?)?;
        Ok(w.iter().zip(&aw).map(|(x, y)| x - y).collect())
    }

    /// `Q w = w − Ξ A w`.
    pub fn project_q(&self, w: &[C64]) -> Result<Vec<C64>> {
        let xw = self.coarse.correction(&self.a_eps.mul_vec(w)?)?;
        Ok(w.iter().zip(&xw).map(|(x, y)| x - y).collect())
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        check_len(self.dim(), v.len())?;
        let xi = self.coarse.correction(v)?;
        let mut y = match self.mode {
            CoarseMode::Additive => self.one_level.apply(v)?,
            CoarseMode::Hybrid => {
                let av = self.a_eps.mul_vec(&xi)?;
                let pv: Vec<C64> = v.iter().zip(&av).map(|(x, y)| x - y).collect();
                self.project_q(&self.one_level.apply(&pv)?)?
            }
        };
        for (a, b) in y.iter_mut().zip(&xi) {
            *a += b;
        }
        Ok(y)
    }
}

impl LinearOperator for TwoLevelPreconditioner {
    fn dim(&self) -> usize {
        self.one_level.dim()
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        TwoLevelPreconditioner::apply(self, x)
    }
}

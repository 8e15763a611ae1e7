//! End-to-end Helmholtz solves: mesh, assembly, decomposition, preconditioner
//! and GMRES, with a serializable report.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_global, assemble_rhs, HelmholtzParams, Source};
use crate::decomposition::{build_decomposition, Decomposition, DEFAULT_OVERLAP_LAYERS};
use crate::error::{check_len, Error, Result};
use crate::linalg::{
    gmres, random_initial_guess, vector, GmresOptions, LinearOperator, ResidualNorm,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::mesh::{
    coarse_resolution, fine_resolution, subdomains_per_dimension, MeshHierarchy, SimplicialMesh,
};
use crate::preconditioner::{
    build_dtn_cs, build_grid_cs, build_one_level, CoarseMode, CoarseSummary, OneLevelOras,
    SelectionPolicy, TwoLevelPreconditioner,
};
use crate::sparse::ComplexSparseMatrix;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconKind {
    None,
    OneLevel,
    Grid,
    Dtn,
}

impl PreconKind {
    pub const ALL: [PreconKind; 4] = [Self::None, Self::OneLevel, Self::Grid, Self::Dtn];

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::OneLevel => "one_level",
            Self::Grid => "grid",
            Self::Dtn => "dtn",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "none" => Ok(Self::None),
            "one_level" | "onelevel" | "oras" => Ok(Self::OneLevel),
            "grid" | "two_level_grid" => Ok(Self::Grid),
            "dtn" | "two_level_dtn" => Ok(Self::Dtn),
            other => Err(Error::invalid(format!("unknown preconditioner '{other}'"))),
        }
    }

    pub fn is_two_level(self) -> bool {
        matches!(self, Self::Grid | Self::Dtn)
    }
}

impl CoarseMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Additive => "additive",
            Self::Hybrid => "hybrid",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "additive" => Ok(Self::Additive),
            "hybrid" => Ok(Self::Hybrid),
            other => Err(Error::invalid(format!("unknown coarse mode '{other}'"))),
        }
    }
}

/// Which global matrix enters `E`, `P` and `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseOperator {
    /// `A_{ε_prec}`.
    #[default]
    Absorptive,
    /// `A_0`, the matrix being solved.
    Pure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub dim: usize,
    pub k: f64,
    /// `H_sub ~ k^{-α}`.
    pub alpha: f64,
    /// `H_coarse ~ k^{-α'}`; `None` means `alpha`.
    pub alpha_prime: Option<f64>,
    /// `ε_prec = k^β`; `None` means no absorption.
    pub beta: Option<f64>,
    pub precon: PreconKind,
    pub mode: CoarseMode,
    pub selection: SelectionPolicy,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub overlap_layers: usize,
    /// Overrides `floor(k^α)` subdomains per axis.
    pub subdomains_per_dim: Option<usize>,
    /// Overrides the coarse grid intervals `floor(k^α')`.
    pub coarse_intervals: Option<usize>,
    /// GMRES stopping rule.
    pub residual_norm: ResidualNorm,
    /// Normalization under which `iterations` is counted. The stopping rule
    /// must be at least as strict for the count to be available.
    pub count_norm: ResidualNorm,
    pub coarse_operator: CoarseOperator,
    /// Build the DtN eigenproblem without absorption.
    pub dtn_without_absorption: bool,
    /// Solve `A_{ε_prec} x = f` instead of `A_0 x = f`.
    pub solve_absorptive: bool,
}

impl SolveConfig {
    pub fn new(dim: usize, k: f64, alpha: f64) -> Self {
        Self {
            dim,
            k,
            alpha,
            alpha_prime: None,
            beta: Some(1.0),
            precon: PreconKind::OneLevel,
            mode: CoarseMode::Hybrid,
            selection: SelectionPolicy::Automatic,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
            overlap_layers: DEFAULT_OVERLAP_LAYERS,
            subdomains_per_dim: None,
            coarse_intervals: None,
            residual_norm: ResidualNorm::Rhs,
            count_norm: ResidualNorm::InitialResidual,
            coarse_operator: CoarseOperator::Absorptive,
            dtn_without_absorption: false,
            solve_absorptive: false,
        }
    }

    pub fn with_precon(mut self, precon: PreconKind) -> Self {
        self.precon = precon;
        self
    }

    pub fn with_beta(mut self, beta: Option<f64>) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_alpha_prime(mut self, alpha_prime: f64) -> Self {
        self.alpha_prime = Some(alpha_prime);
        self
    }

    /// The 3d load-balancing choice `α' = 3/2 − α`.
    pub fn with_balanced_alpha_prime(mut self) -> Self {
        self.alpha_prime = Some(1.5 - self.alpha);
        self
    }

    pub fn effective_alpha_prime(&self) -> f64 {
        self.alpha_prime.unwrap_or(self.alpha)
    }

    pub fn epsilon_prec(&self) -> f64 {
        self.beta.map_or(0.0, |b| self.k.powf(b))
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::invalid(format!(
                "dimension must be 2 or 3, got {}",
                self.dim
            )));
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::invalid(format!(
                "wavenumber must be positive, got {}",
                self.k
            )));
        }
        for (name, v) in [
            ("alpha", Some(self.alpha)),
            ("alpha_prime", self.alpha_prime),
            ("beta", self.beta),
        ] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!(
                        "{name} must be finite and nonnegative, got {v}"
                    )));
                }
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        if self.overlap_layers == 0 {
            return Err(Error::invalid("overlap_layers must be positive"));
        }
        if matches!(self.subdomains_per_dim, Some(0)) || matches!(self.coarse_intervals, Some(0)) {
            return Err(Error::invalid("forced resolutions must be positive"));
        }
        Ok(())
    }
}

/// Coarse intervals per axis giving roughly `n_cs` grid coarse functions:
/// `round(n_cs^{1/d}) − 1`, at least 1.
pub fn coarse_intervals_for_size(n_cs: usize, dim: usize) -> usize {
    let side = (n_cs as f64).powf(1.0 / dim as f64).round() as usize;
    side.saturating_sub(1).max(1)
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Timings {
    pub assembly_seconds: f64,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub config: SolveConfig,
    pub seed: u64,
    /// Steps until the residual under `count_norm` first met `tol`, or all
    /// steps performed if it never did.
    pub iterations: usize,
    /// Arnoldi steps until the stopping rule was met.
    pub arnoldi_steps: usize,
    /// Both the stopping rule and the counting rule were met.
    pub converged: bool,
    pub breakdown: bool,
    /// Fine mesh intervals per axis.
    pub m: usize,
    pub n: usize,
    pub n_sub: usize,
    pub n_cs: usize,
    pub epsilon_prec: f64,
    pub residual_history: Vec<f64>,
    /// `‖f − A x‖ / ‖f‖` recomputed from the solution.
    pub verified_residual: f64,
    pub timings: Timings,
    pub coarse: Option<CoarseSummary>,
    #[serde(skip)]
    pub solution: Vec<C64>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }
}

/// The configured preconditioner as a single operator.
#[derive(Debug)]
pub enum Preconditioner {
    None(usize),
    OneLevel(OneLevelOras),
    TwoLevel(Box<TwoLevelPreconditioner>),
}

impl LinearOperator for Preconditioner {
    fn dim(&self) -> usize {
        match self {
            Self::None(n) => *n,
            Self::OneLevel(p) => p.dim(),
            Self::TwoLevel(p) => p.dim(),
        }
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        match self {
            Self::None(n) => {
                check_len(*n, x.len())?;
                Ok(x.to_vec())
            }
            Self::OneLevel(p) => p.apply(x),
            Self::TwoLevel(p) => p.apply(x),
        }
    }
}

/// Everything a solve needs except the start vector; shared across seeds.
#[derive(Debug)]
pub struct Problem {
    config: SolveConfig,
    mesh: SimplicialMesh,
    decomposition: Arc<Decomposition>,
    matrix: ComplexSparseMatrix,
    rhs: Vec<C64>,
    preconditioner: Preconditioner,
    assembly_seconds: f64,
    setup_seconds: f64,
}

impl Problem {
    pub fn build(config: &SolveConfig) -> Result<Self> {
        config.validate()?;
        let t0 = Instant::now();
        let dim = config.dim;
        let k = config.k;
        let n1d = match config.subdomains_per_dim {
            Some(n) => n,
            None => subdomains_per_dimension(k, config.alpha)?,
        };
        let m = fine_resolution(k, n1d);
        let mesh = SimplicialMesh::uniform(dim, m)?;
        let eps_prec = config.epsilon_prec();
        let pure = HelmholtzParams::new(k, 0.0);
        let absorptive = HelmholtzParams::new(k, eps_prec).with_eta(k);
        let a0 = assemble_global(&mesh, &pure)?;
        let a_eps = if eps_prec == 0.0 {
            a0.clone()
        } else {
            assemble_global(&mesh, &absorptive)?
        };
        let rhs = assemble_rhs(&mesh, &Source::gaussian(dim))?;
        let decomposition = Arc::new(build_decomposition(&mesh, n1d, config.overlap_layers)?);
        let assembly_seconds = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let n = mesh.num_vertices();
        let coarse_matrix = match config.coarse_operator {
            CoarseOperator::Absorptive => &a_eps,
            CoarseOperator::Pure => &a0,
        };
        let preconditioner = match config.precon {
            PreconKind::None => Preconditioner::None(n),
            PreconKind::OneLevel => Preconditioner::OneLevel(build_one_level(
                &mesh,
                decomposition.clone(),
                k,
                eps_prec,
            )?),
            PreconKind::Grid | PreconKind::Dtn => {
                let one = build_one_level(&mesh, decomposition.clone(), k, eps_prec)?;
                let coarse = if config.precon == PreconKind::Grid {
                    let mc = match config.coarse_intervals {
                        Some(mc) => mc,
                        None => coarse_resolution(k, config.effective_alpha_prime())?,
                    };
                    let hierarchy =
                        MeshHierarchy::new(SimplicialMesh::uniform(dim, mc)?, mesh.clone())?;
                    build_grid_cs(&hierarchy, coarse_matrix)?
                } else {
                    let eig_params = if config.dtn_without_absorption {
                        HelmholtzParams::new(k, 0.0).with_eta(k)
                    } else {
                        absorptive
                    };
                    build_dtn_cs(
                        &mesh,
                        &decomposition,
                        &eig_params,
                        config.selection,
                        coarse_matrix,
                    )?
                };
                Preconditioner::TwoLevel(Box::new(TwoLevelPreconditioner::new(
                    one,
                    coarse,
                    config.mode,
                    coarse_matrix.clone(),
                )?))
            }
        };
        let setup_seconds = t1.elapsed().as_secs_f64();
        let matrix = if config.solve_absorptive { a_eps } else { a0 };
        Ok(Self {
            config: config.clone(),
            mesh,
            decomposition,
            matrix,
            rhs,
            preconditioner,
            assembly_seconds,
            setup_seconds,
        })
    }

    pub fn config(&self) -> &SolveConfig {
        &self.config
    }

    pub fn mesh(&self) -> &SimplicialMesh {
        &self.mesh
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    /// The system matrix being solved.
    pub fn matrix(&self) -> &ComplexSparseMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[C64] {
        &self.rhs
    }

    pub fn preconditioner(&self) -> &Preconditioner {
        &self.preconditioner
    }

    pub fn coarse_summary(&self) -> Option<CoarseSummary> {
        match &self.preconditioner {
            Preconditioner::TwoLevel(p) => Some(p.coarse().summary()),
            _ => None,
        }
    }

    /// Runs GMRES from `random_initial_guess(n, seed)`.
    pub fn run(&self, seed: u64) -> Result<SolveReport> {
        let n = self.matrix.nrows();
        let x0 = random_initial_guess(n, seed);
        let options = GmresOptions {
            tol: self.config.tol,
            max_iter: self.config.max_iter,
            residual_norm: self.config.residual_norm,
        };
        let t = Instant::now();
        let outcome = gmres(&self.matrix, &self.rhs, &self.preconditioner, &x0, &options)?;
        let solve_seconds = t.elapsed().as_secs_f64();
        let verified_residual = verify_solution(&outcome.solution, &self.matrix, &self.rhs)?;
        let counted = outcome.steps_to(self.config.tol, self.config.count_norm);
        let coarse = self.coarse_summary();
        let mut config = self.config.clone();
        config.seed = seed;
        Ok(SolveReport {
            config,
            seed,
            iterations: counted.unwrap_or(outcome.iterations),
            arnoldi_steps: outcome.iterations,
            converged: outcome.converged && counted.is_some(),
            breakdown: outcome.breakdown,
            m: self.mesh.intervals(),
            n,
            n_sub: self.decomposition.num_subdomains(),
            n_cs: coarse.as_ref().map_or(0, |c| c.n_cs),
            epsilon_prec: self.config.epsilon_prec(),
            residual_history: outcome.residual_history,
            verified_residual,
            timings: Timings {
                assembly_seconds: self.assembly_seconds,
                setup_seconds: self.setup_seconds,
                solve_seconds,
            },
            coarse,
            solution: outcome.solution,
        })
    }
}

/// Builds the problem for `config` and solves from `config.seed`.
pub fn solve(config: &SolveConfig) -> Result<SolveReport> {
    Problem::build(config)?.run(config.seed)
}

/// One setup, one GMRES run per seed.
pub fn solve_seeds(config: &SolveConfig, seeds: &[u64]) -> Result<Vec<SolveReport>> {
    let problem = Problem::build(config)?;
    seeds.iter().map(|&s| problem.run(s)).collect()
}

/// `‖f − A x‖ / ‖f‖`, or `‖f − A x‖` when `f = 0`.
pub fn verify_solution(x: &[C64], a: &ComplexSparseMatrix, f: &[C64]) -> Result<f64> {
    check_len(a.ncols(), x.len())?;
    check_len(a.nrows(), f.len())?;
    let ax = a.mul_vec(x)?;
    let r = vector::norm(&vector::sub(f, &ax));
    let nf = vector::norm(f);
    Ok(if nf > 0.0 { r / nf } else { r })
}

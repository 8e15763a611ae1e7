//! P1 finite-element assembly of the Helmholtz sesquilinear form
//!
//! `a_ε(u, v) = ∫_Ω ∇u·∇v̄ − (k² + iε) u v̄ − ∫_Γ iη u v̄`
//!
//! All element integrals are exact for piecewise-linear functions.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::decomposition::Subdomain;
use crate::error::{Error, Result};
use crate::mesh::{det3, SimplicialMesh};
use crate::sparse::ComplexSparseMatrix;

/// Elements per rayon task during assembly.
const ELEMENT_CHUNK: usize = 4096;

/// Wavenumber, absorption and impedance coefficient of one Helmholtz problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelmholtzParams {
    pub k: f64,
    pub epsilon: f64,
    pub eta: f64,
}

impl HelmholtzParams {
    /// `η = sign(ε)·k` for `ε ≠ 0`, `η = k` for `ε = 0`.
    pub fn new(k: f64, epsilon: f64) -> Self {
        let eta = if epsilon == 0.0 {
            k
        } else {
            epsilon.signum() * k
        };
        Self { k, epsilon, eta }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    /// Coefficients of the stiffness, mass and boundary-mass parts.
    pub fn form(&self) -> FormCoefficients {
        FormCoefficients {
            stiffness: 1.0,
            mass: -C64::new(self.k * self.k, self.epsilon),
            boundary: C64::new(0.0, -self.eta),
        }
    }
}

/// Weights of the three bilinear forms combined by [`assemble_form`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormCoefficients {
    pub stiffness: f64,
    pub mass: C64,
    pub boundary: C64,
}

impl FormCoefficients {
    pub const MASS_ONLY: Self = Self {
        stiffness: 0.0,
        mass: C64::new(1.0, 0.0),
        boundary: C64::new(0.0, 0.0),
    };
    pub const STIFFNESS_ONLY: Self = Self {
        stiffness: 1.0,
        mass: C64::new(0.0, 0.0),
        boundary: C64::new(0.0, 0.0),
    };
    pub const BOUNDARY_ONLY: Self = Self {
        stiffness: 0.0,
        mass: C64::new(0.0, 0.0),
        boundary: C64::new(1.0, 0.0),
    };
}

/// Measure and barycentric gradients of one simplex.
struct ElementGeometry {
    volume: f64,
    grads: [[f64; 3]; 4],
}

fn element_geometry(mesh: &SimplicialMesh, s: usize) -> Result<ElementGeometry> {
    let dim = mesh.dim();
    let verts = mesh.simplex(s);
    let p0 = mesh.vertex(verts[0]);
    // columns are the edge vectors x_i − x_0
    let mut jac = [[0.0; 3]; 3];
    for (c, &v) in verts[1..].iter().enumerate() {
        let p = mesh.vertex(v);
        for r in 0..dim {
            jac[r][c] = p[r] - p0[r];
        }
    }
    let mut grads = [[0.0; 3]; 4];
    let det;
    if dim == 2 {
        det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() <= f64::EPSILON * 1e-3 {
            return Err(Error::DegenerateSimplex { index: s });
        }
        // rows of J⁻¹
        grads[1] = [jac[1][1] / det, -jac[0][1] / det, 0.0];
        grads[2] = [-jac[1][0] / det, jac[0][0] / det, 0.0];
    } else {
        det = det3(&jac);
        if det.abs() <= f64::EPSILON * 1e-3 {
            return Err(Error::DegenerateSimplex { index: s });
        }
        for i in 0..3 {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            // row i of the inverse is the cross product of columns i1 and i2 over det
            let a = [jac[0][i1], jac[1][i1], jac[2][i1]];
            let b = [jac[0][i2], jac[1][i2], jac[2][i2]];
            grads[i + 1] = [
                (a[1] * b[2] - a[2] * b[1]) / det,
                (a[2] * b[0] - a[0] * b[2]) / det,
                (a[0] * b[1] - a[1] * b[0]) / det,
            ];
        }
    }
    for c in 0..3 {
        grads[0][c] = -(1..=dim).map(|i| grads[i][c]).sum::<f64>();
    }
    let factorial = if dim == 2 { 2.0 } else { 6.0 };
    Ok(ElementGeometry {
        volume: det.abs() / factorial,
        grads,
    })
}

/// Exact P1 stiffness matrix of one simplex, `(d+1)×(d+1)` row-major in a 4×4 buffer.
pub fn element_stiffness(mesh: &SimplicialMesh, s: usize) -> Result<[[f64; 4]; 4]> {
    let g = element_geometry(mesh, s)?;
    let n = mesh.dim() + 1;
    let mut out = [[0.0; 4]; 4];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = g.volume * (0..3).map(|c| g.grads[i][c] * g.grads[j][c]).sum::<f64>();
        }
    }
    Ok(out)
}

/// Measure of a facet (edge length in 2d, triangle area in 3d).
fn facet_measure(mesh: &SimplicialMesh, facet: &[usize]) -> f64 {
    let p0 = mesh.vertex(facet[0]);
    let p1 = mesh.vertex(facet[1]);
    let e1: Vec<f64> = p1.iter().zip(p0).map(|(a, b)| a - b).collect();
    if mesh.dim() == 2 {
        e1.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else {
        let p2 = mesh.vertex(facet[2]);
        let e2: Vec<f64> = p2.iter().zip(p0).map(|(a, b)| a - b).collect();
        let cross = [
            e1[1] * e2[2] - e1[2] * e2[1],
            e1[2] * e2[0] - e1[0] * e2[2],
            e1[0] * e2[1] - e1[1] * e2[0],
        ];
        0.5 * cross.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Assembles `stiffness·K + mass·M + boundary·B` over a set of simplices and
/// boundary facets, numbering dofs through `local_of`.
pub(crate) fn assemble_on<F>(
    mesh: &SimplicialMesh,
    elements: &[usize],
    facets: &[Vec<usize>],
    n_local: usize,
    local_of: F,
    coef: FormCoefficients,
) -> Result<ComplexSparseMatrix>
where
    F: Fn(usize) -> usize + Sync,
{
    let dim = mesh.dim();
    let n = dim + 1;
    let mass_scale = 1.0 / ((dim + 1) * (dim + 2)) as f64;
    let chunks: Vec<Result<Vec<(usize, usize, C64)>>> = elements
        .par_chunks(ELEMENT_CHUNK)
        .map(|chunk| {
            let mut trip = Vec::with_capacity(chunk.len() * n * n);
            for &s in chunk {
                let g = element_geometry(mesh, s)?;
                let verts = mesh.simplex(s);
                for i in 0..n {
                    for j in 0..n {
                        let grad =
                            g.volume * (0..3).map(|c| g.grads[i][c] * g.grads[j][c]).sum::<f64>();
                        let mass = g.volume * mass_scale * if i == j { 2.0 } else { 1.0 };
                        let v = coef.stiffness * grad + coef.mass * mass;
                        trip.push((local_of(verts[i]), local_of(verts[j]), v));
                    }
                }
            }
            Ok(trip)
        })
        .collect();
    let mut triplets = Vec::with_capacity(elements.len() * n * n + facets.len() * dim * dim);
    for c in chunks {
        triplets.extend(c?);
    }
    if coef.boundary != C64::new(0.0, 0.0) {
        // facet mass: |F|/(d(d+1)) · (1 + δ_ij)
        let facet_scale = 1.0 / (dim * (dim + 1)) as f64;
        for f in facets {
            let meas = facet_measure(mesh, f);
            for (i, &a) in f.iter().enumerate() {
                for (j, &b) in f.iter().enumerate() {
                    let w = meas * facet_scale * if i == j { 2.0 } else { 1.0 };
                    triplets.push((local_of(a), local_of(b), coef.boundary * w));
                }
            }
        }
    }
    ComplexSparseMatrix::from_triplets(n_local, n_local, &triplets)
}

/// Global matrix of an arbitrary combination of the three forms.
pub fn assemble_form(mesh: &SimplicialMesh, coef: FormCoefficients) -> Result<ComplexSparseMatrix> {
    let elements: Vec<usize> = (0..mesh.num_simplices()).collect();
    let facets: Vec<Vec<usize>> = mesh.boundary_facets().map(|f| f.to_vec()).collect();
    assemble_on(mesh, &elements, &facets, mesh.num_vertices(), |v| v, coef)
}

/// `A_ε` for the whole domain with the impedance condition on `∂Ω`.
pub fn assemble_global(
    mesh: &SimplicialMesh,
    params: &HelmholtzParams,
) -> Result<ComplexSparseMatrix> {
    if !(params.k >= 0.0) {
        return Err(Error::invalid(format!(
            "wavenumber must be non-negative, got {}",
            params.k
        )));
    }
    assemble_form(mesh, params.form())
}

pub type SourceFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Right-hand-side source terms.
#[derive(Clone)]
pub enum Source {
    /// `-exp(-100 |x - c|²)` on the unit square.
    Gauss2d,
    /// `-exp(-400 |x - c|²)` on the unit cube.
    Gauss3d,
    Constant(f64),
    Custom(SourceFn),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Gauss2d => write!(f, "Gauss2d"),
            Source::Gauss3d => write!(f, "Gauss3d"),
            Source::Constant(c) => write!(f, "Constant({c})"),
            Source::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Source {
    /// The Gaussian source matching the mesh dimension.
    pub fn gaussian(dim: usize) -> Self {
        if dim == 2 {
            Source::Gauss2d
        } else {
            Source::Gauss3d
        }
    }

    fn eval(&self, p: &[f64]) -> f64 {
        let r2 = || p.iter().map(|x| (x - 0.5) * (x - 0.5)).sum::<f64>();
        match self {
            Source::Gauss2d => -(-100.0 * r2()).exp(),
            Source::Gauss3d => -(-400.0 * r2()).exp(),
            Source::Constant(c) => *c,
            Source::Custom(f) => f(p),
        }
    }
}

/// Lumped mass weights `∫ φ_v ≈ Σ_{K ∋ v} |K| / (d+1)`.
pub fn lumped_mass(mesh: &SimplicialMesh) -> Vec<f64> {
    let mut w = vec![0.0; mesh.num_vertices()];
    let share = 1.0 / (mesh.dim() + 1) as f64;
    for s in 0..mesh.num_simplices() {
        let vol = mesh.simplex_signed_volume(s).abs();
        for &v in mesh.simplex(s) {
            w[v] += vol * share;
        }
    }
    w
}

/// Load vector `f_v = f(x_v) · ∫ φ_v` (vertex quadrature).
pub fn assemble_rhs(mesh: &SimplicialMesh, source: &Source) -> Result<Vec<C64>> {
    match (source, mesh.dim()) {
        (Source::Gauss2d, 3) | (Source::Gauss3d, 2) => {
            return Err(Error::invalid(format!(
                "{source:?} does not match a {}d mesh",
                mesh.dim()
            )))
        }
        _ => {}
    }
    let weights = lumped_mass(mesh);
    Ok((0..mesh.num_vertices())
        .map(|v| C64::new(source.eval(mesh.vertex(v)) * weights[v], 0.0))
        .collect())
}

/// Local matrices of one subdomain, all in the subdomain's local dof numbering.
#[derive(Debug, Clone)]
pub struct SubdomainMatrices {
    /// Impedance condition on the whole of `∂Ω_j`.
    pub a_local: ComplexSparseMatrix,
    /// Impedance condition only on `∂Ω_j ∩ ∂Ω`; no boundary term on the interface.
    pub a_neu: ComplexSparseMatrix,
    /// Mass matrix of the interface facets, `∫_{Γ_j} φ_k φ_l`.
    pub m_interface: ComplexSparseMatrix,
}

/// Assembles the local impedance matrix, the interface-free matrix used by the
/// DtN eigenproblem and the interface mass matrix.
pub fn assemble_subdomain(
    mesh: &SimplicialMesh,
    subdomain: &Subdomain,
    params: &HelmholtzParams,
) -> Result<SubdomainMatrices> {
    let n_local = subdomain.num_dofs();
    let local_of = |g: usize| {
        subdomain
            .local_index(g)
            .expect("element vertex inside subdomain")
    };
    let (physical, interface) = subdomain.boundary_facets(mesh);
    let all: Vec<Vec<usize>> = physical.iter().chain(interface.iter()).cloned().collect();
    let coef = params.form();
    let a_local = assemble_on(mesh, subdomain.elements(), &all, n_local, local_of, coef)?;
    let a_neu = assemble_on(
        mesh,
        subdomain.elements(),
        &physical,
        n_local,
        local_of,
        coef,
    )?;
    let m_interface = assemble_on(
        mesh,
        &[],
        &interface,
        n_local,
        local_of,
        FormCoefficients::BOUNDARY_ONLY,
    )?;
    Ok(SubdomainMatrices {
        a_local,
        a_neu,
        m_interface,
    })
}

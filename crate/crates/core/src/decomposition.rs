//! Regular overlapping box decompositions of a structured mesh.
//!
//! The `m^d` cells are split into `N^d` equal boxes, and each box is grown by
//! `overlap_layers` layers of cells in every direction (clipped at `∂Ω`). A
//! subdomain's dofs are all vertices of its cells; the partition of unity weighs
//! every dof by one over the number of subdomains that contain it.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::mesh::SimplicialMesh;

/// Default number of cell layers added on each side of a box.
pub const DEFAULT_OVERLAP_LAYERS: usize = 2;

/// One overlapping subdomain, a box of whole cells.
#[derive(Debug, Clone)]
pub struct Subdomain {
    index: usize,
    dim: usize,
    mesh_intervals: usize,
    /// Vertex index range per axis, inclusive on both ends.
    lo: [usize; 3],
    hi: [usize; 3],
    elements: Vec<usize>,
    dofs: Vec<usize>,
    interior_dofs: Vec<usize>,
    interface_dofs: Vec<usize>,
    physical_boundary_dofs: Vec<usize>,
}

impl Subdomain {
    fn new(mesh: &SimplicialMesh, index: usize, lo: [usize; 3], hi: [usize; 3]) -> Self {
        let dim = mesh.dim();
        let m = mesh.intervals();
        let mut dofs = Vec::new();
        let mut interior_dofs = Vec::new();
        let mut interface_dofs = Vec::new();
        let mut physical_boundary_dofs = Vec::new();
        let hi_or = |a: usize| if a < dim { hi[a] } else { 0 };
        let lo_or = |a: usize| if a < dim { lo[a] } else { 0 };
        for z in lo_or(2)..=hi_or(2) {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    let idx = [x, y, z];
                    let local = dofs.len();
                    dofs.push(mesh.vertex_at(&idx));
                    let on_box = (0..dim).any(|a| idx[a] == lo[a] || idx[a] == hi[a]);
                    let on_domain = (0..dim).any(|a| idx[a] == 0 || idx[a] == m);
                    if on_domain {
                        physical_boundary_dofs.push(local);
                    }
                    if on_box && !on_domain {
                        interface_dofs.push(local);
                    } else {
                        interior_dofs.push(local);
                    }
                }
            }
        }
        let mut elements = Vec::new();
        for z in lo_or(2)..hi_or(2).max(lo_or(2) + 1) {
            for y in lo[1]..hi[1] {
                for x in lo[0]..hi[0] {
                    let cell = mesh.cell_at(&[x, y, z]);
                    elements.extend(mesh.cell_simplices(cell));
                }
            }
        }
        Self {
            index,
            dim,
            mesh_intervals: m,
            lo,
            hi,
            elements,
            dofs,
            interior_dofs,
            interface_dofs,
            physical_boundary_dofs,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Simplices of the subdomain (whole cells).
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    /// Global vertex numbers in local order.
    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn num_dofs(&self) -> usize {
        self.dofs.len()
    }

    /// Local indices of the dofs not on the interface (the set `I`).
    pub fn interior_dofs(&self) -> &[usize] {
        &self.interior_dofs
    }

    /// Local indices on `Γ_j = ∂Ω_j \ ∂Ω`.
    pub fn interface_dofs(&self) -> &[usize] {
        &self.interface_dofs
    }

    /// Local indices on `∂Ω_j ∩ ∂Ω`.
    pub fn physical_boundary_dofs(&self) -> &[usize] {
        &self.physical_boundary_dofs
    }

    /// Vertex index range of the box along `axis`, inclusive.
    pub fn vertex_range(&self, axis: usize) -> (usize, usize) {
        (self.lo[axis], self.hi[axis])
    }

    /// Local number of a global vertex, if it belongs to the subdomain.
    pub fn local_index(&self, global: usize) -> Option<usize> {
        let np = self.mesh_intervals + 1;
        let mut rest = global;
        let mut local = 0;
        let mut stride = 1;
        for a in 0..self.dim {
            let i = rest % np;
            rest /= np;
            if i < self.lo[a] || i > self.hi[a] {
                return None;
            }
            local += (i - self.lo[a]) * stride;
            stride *= self.hi[a] - self.lo[a] + 1;
        }
        Some(local)
    }

    /// Facets of `∂Ω_j`, split into those on `∂Ω` and those on the interface.
    pub fn boundary_facets(&self, mesh: &SimplicialMesh) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let dim = self.dim;
        let m = self.mesh_intervals;
        let mut physical = Vec::new();
        let mut interface = Vec::new();
        for axis in 0..dim {
            let others: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
            for side in [self.lo[axis], self.hi[axis]] {
                let target = if side == 0 || side == m {
                    &mut physical
                } else {
                    &mut interface
                };
                let (b, c) = (others[0], others.get(1).copied());
                let c_range = match c {
                    Some(c) => self.lo[c]..self.hi[c],
                    None => 0..1,
                };
                for ic in c_range {
                    for ib in self.lo[b]..self.hi[b] {
                        let mut base = [0usize; 3];
                        base[axis] = side;
                        base[b] = ib;
                        if let Some(c) = c {
                            base[c] = ic;
                        }
                        let at = |db: usize, dc: usize| {
                            let mut p = base;
                            p[b] += db;
                            if let Some(c) = c {
                                p[c] += dc;
                            }
                            mesh.vertex_at(&p)
                        };
                        if c.is_none() {
                            target.push(vec![at(0, 0), at(1, 0)]);
                        } else {
                            // split along the face's lowest-to-highest corner diagonal
                            target.push(vec![at(0, 0), at(1, 0), at(1, 1)]);
                            target.push(vec![at(0, 0), at(0, 1), at(1, 1)]);
                        }
                    }
                }
            }
        }
        (physical, interface)
    }
}

/// Overlapping decomposition with its multiplicity partition of unity.
#[derive(Debug, Clone)]
pub struct Decomposition {
    subdomains: Vec<Subdomain>,
    pou_weights: Vec<Vec<f64>>,
    subdomains_per_dim: usize,
    overlap_layers: usize,
    num_global_dofs: usize,
}

/// Per-decomposition statistics for debugging.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionSummary {
    pub num_subdomains: usize,
    pub subdomains_per_dim: usize,
    pub overlap_layers: usize,
    pub num_global_dofs: usize,
    pub max_multiplicity: usize,
    pub total_local_dofs: usize,
    pub subdomains: Vec<SubdomainSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubdomainSummary {
    pub index: usize,
    pub dofs: usize,
    pub interface_dofs: usize,
    pub physical_boundary_dofs: usize,
    pub elements: usize,
}

/// Builds the `n1d^d` overlapping boxes.
pub fn build_decomposition(
    mesh: &SimplicialMesh,
    n1d: usize,
    overlap_layers: usize,
) -> Result<Decomposition> {
    let dim = mesh.dim();
    let m = mesh.intervals();
    if n1d == 0 {
        return Err(Error::invalid("need at least one subdomain per dimension"));
    }
    if n1d > m {
        return Err(Error::invalid(format!(
            "{n1d} subdomains per dimension exceed {m} cells per dimension"
        )));
    }
    if !m.is_multiple_of(n1d) {
        return Err(Error::invalid(format!(
            "{m} intervals per edge are not divisible by {n1d} subdomains per dimension"
        )));
    }
    if overlap_layers == 0 {
        return Err(Error::invalid("overlap must be at least one cell layer"));
    }
    let width = m / n1d;
    let nsub = n1d.pow(dim as u32);
    let mut subdomains = Vec::with_capacity(nsub);
    for j in 0..nsub {
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut rest = j;
        for a in 0..dim {
            let b = rest % n1d;
            rest /= n1d;
            lo[a] = (b * width).saturating_sub(overlap_layers);
            hi[a] = ((b + 1) * width + overlap_layers).min(m);
        }
        subdomains.push(Subdomain::new(mesh, j, lo, hi));
    }
    let n = mesh.num_vertices();
    let mut multiplicity = vec![0usize; n];
    for s in &subdomains {
        for &g in s.dofs() {
            multiplicity[g] += 1;
        }
    }
    let pou_weights = subdomains
        .iter()
        .map(|s| {
            s.dofs()
                .iter()
                .map(|&g| 1.0 / multiplicity[g] as f64)
                .collect()
        })
        .collect();
    Ok(Decomposition {
        subdomains,
        pou_weights,
        subdomains_per_dim: n1d,
        overlap_layers,
        num_global_dofs: n,
    })
}

impl Decomposition {
    pub fn subdomains(&self) -> &[Subdomain] {
        &self.subdomains
    }

    pub fn subdomain(&self, j: usize) -> &Subdomain {
        &self.subdomains[j]
    }

    pub fn num_subdomains(&self) -> usize {
        self.subdomains.len()
    }

    pub fn subdomains_per_dim(&self) -> usize {
        self.subdomains_per_dim
    }

    pub fn overlap_layers(&self) -> usize {
        self.overlap_layers
    }

    pub fn num_global_dofs(&self) -> usize {
        self.num_global_dofs
    }

    /// Diagonal of `D_j` in local order.
    pub fn pou_weights(&self, j: usize) -> &[f64] {
        &self.pou_weights[j]
    }

    /// `R_j v`.
    pub fn restrict(&self, j: usize, v: &[C64]) -> Result<Vec<C64>> {
        check_len(self.num_global_dofs, v.len())?;
        Ok(self.subdomains[j].dofs.iter().map(|&g| v[g]).collect())
    }

    /// `accumulator += R_jᵀ D_j w`.
    pub fn prolongate_weighted(&self, j: usize, w: &[C64], accumulator: &mut [C64]) -> Result<()> {
        let sub = &self.subdomains[j];
        check_len(sub.num_dofs(), w.len())?;
        check_len(self.num_global_dofs, accumulator.len())?;
        for ((&g, &d), &x) in sub.dofs.iter().zip(&self.pou_weights[j]).zip(w) {
            accumulator[g] += x * d;
        }
        Ok(())
    }

    /// Number of subdomains containing each global dof.
    pub fn multiplicity(&self) -> Vec<usize> {
        let mut count = vec![0usize; self.num_global_dofs];
        for s in &self.subdomains {
            for &g in s.dofs() {
                count[g] += 1;
            }
        }
        count
    }

    pub fn summary(&self) -> DecompositionSummary {
        DecompositionSummary {
            num_subdomains: self.num_subdomains(),
            subdomains_per_dim: self.subdomains_per_dim,
            overlap_layers: self.overlap_layers,
            num_global_dofs: self.num_global_dofs,
            max_multiplicity: self.multiplicity().into_iter().max().unwrap_or(0),
            total_local_dofs: self.subdomains.iter().map(|s| s.num_dofs()).sum(),
            subdomains: self
                .subdomains
                .iter()
                .map(|s| SubdomainSummary {
                    index: s.index,
                    dofs: s.num_dofs(),
                    interface_dofs: s.interface_dofs.len(),
                    physical_boundary_dofs: s.physical_boundary_dofs.len(),
                    elements: s.elements.len(),
                })
                .collect(),
        }
    }
}

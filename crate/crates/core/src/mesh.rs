//! Structured simplicial meshes of the unit square and cube.
//!
//! Every cell of the `m^d` Cartesian grid is split into Kuhn simplices: for each
//! permutation `π` of the axes, the simplex walks from the lowest cell corner to
//! the highest one adding unit steps in the order `π`. In 2d this is the split of
//! each square along its main diagonal, in 3d the classic 6-tetrahedra split.
//! Kuhn splits of nested grids are conforming, and point location inside a cell
//! reduces to sorting the local coordinates.

use std::io::Write;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sparse::ComplexSparseMatrix;

/// Exponent of the fine-mesh rule `h ~ k^{-3/2}`.
pub const FINE_MESH_EXPONENT: f64 = 1.5;

/// Slack used when truncating powers of `k` that should be integers.
const POWER_SLACK: f64 = 1e-9;

/// Uniform simplicial mesh of `[0,1]^d`, `d ∈ {2, 3}`.
#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    dim: usize,
    intervals: usize,
    /// Flat coordinates, `dim` per vertex.
    vertices: Vec<f64>,
    /// Flat vertex indices, `dim + 1` per simplex.
    simplices: Vec<usize>,
    /// Flat vertex indices, `dim` per boundary facet.
    boundary_facets: Vec<usize>,
}

/// Axis orderings that define the Kuhn simplices of one cell.
pub(crate) fn kuhn_permutations(dim: usize) -> &'static [[usize; 3]] {
    const P2: [[usize; 3]; 2] = [[0, 1, 2], [1, 0, 2]];
    const P3: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    if dim == 2 {
        &P2
    } else {
        &P3
    }
}

impl SimplicialMesh {
    /// Builds the Kuhn-split mesh with `m` intervals per edge.
    pub fn uniform(dim: usize, m: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::invalid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if m == 0 {
            return Err(Error::invalid("intervals per edge must be positive"));
        }
        let np = m + 1;
        let nverts = np.pow(dim as u32);
        let mut vertices = Vec::with_capacity(nverts * dim);
        for v in 0..nverts {
            let mut rest = v;
            for _ in 0..dim {
                vertices.push((rest % np) as f64 / m as f64);
                rest /= np;
            }
        }

        let ncells = m.pow(dim as u32);
        let perms = kuhn_permutations(dim);
        let mut simplices = Vec::with_capacity(ncells * perms.len() * (dim + 1));
        let stride = |axis: usize| np.pow(axis as u32);
        for cell in 0..ncells {
            let base = cell_base_vertex(dim, m, cell);
            for perm in perms {
                let mut v = base;
                simplices.push(v);
                for &axis in &perm[..dim] {
                    v += stride(axis);
                    simplices.push(v);
                }
            }
        }

        let mut boundary_facets = Vec::new();
        for axis in 0..dim {
            let others: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
            for side in [0, m] {
                let face_cells = m.pow(dim as u32 - 1);
                for fc in 0..face_cells {
                    let mut base = side * stride(axis);
                    let mut rest = fc;
                    for &a in &others {
                        base += (rest % m) * stride(a);
                        rest /= m;
                    }
                    if dim == 2 {
                        boundary_facets.extend([base, base + stride(others[0])]);
                    } else {
                        let (b, c) = (stride(others[0]), stride(others[1]));
                        boundary_facets.extend([base, base + b, base + b + c]);
                        boundary_facets.extend([base, base + c, base + b + c]);
                    }
                }
            }
        }

        Ok(Self {
            dim,
            intervals: m,
            vertices,
            simplices,
            boundary_facets,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of intervals `m` along each edge of the unit square/cube.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn h(&self) -> f64 {
        1.0 / self.intervals as f64
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len() / (self.dim + 1)
    }

    pub fn num_boundary_facets(&self) -> usize {
        self.boundary_facets.len() / self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.intervals.pow(self.dim as u32)
    }

    /// Simplices per Cartesian cell: 2 in 2d, 6 in 3d.
    pub fn simplices_per_cell(&self) -> usize {
        kuhn_permutations(self.dim).len()
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.vertices[v * self.dim..(v + 1) * self.dim]
    }

    pub fn simplex(&self, s: usize) -> &[usize] {
        let n = self.dim + 1;
        &self.simplices[s * n..(s + 1) * n]
    }

    pub fn boundary_facet(&self, f: usize) -> &[usize] {
        &self.boundary_facets[f * self.dim..(f + 1) * self.dim]
    }

    pub fn simplices(&self) -> impl ExactSizeIterator<Item = &[usize]> {
        self.simplices.chunks_exact(self.dim + 1)
    }

    pub fn boundary_facets(&self) -> impl ExactSizeIterator<Item = &[usize]> {
        self.boundary_facets.chunks_exact(self.dim)
    }

    /// Grid multi-index of a vertex (one entry per axis, `0..=m`).
    pub fn vertex_grid_index(&self, v: usize) -> [usize; 3] {
        let np = self.intervals + 1;
        let mut out = [0; 3];
        let mut rest = v;
        for o in out.iter_mut().take(self.dim) {
            *o = rest % np;
            rest /= np;
        }
        out
    }

    /// Vertex number of a grid multi-index.
    pub fn vertex_at(&self, index: &[usize]) -> usize {
        let np = self.intervals + 1;
        index[..self.dim]
            .iter()
            .rev()
            .fold(0, |acc, &i| acc * np + i)
    }

    /// Cell number of a cell multi-index (`0..m` per axis).
    pub fn cell_at(&self, index: &[usize]) -> usize {
        index[..self.dim]
            .iter()
            .rev()
            .fold(0, |acc, &i| acc * self.intervals + i)
    }

    /// Indices of the simplices that tile a cell.
    pub fn cell_simplices(&self, cell: usize) -> std::ops::Range<usize> {
        let n = self.simplices_per_cell();
        cell * n..(cell + 1) * n
    }

    /// True when the vertex lies on `∂Ω`.
    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let idx = self.vertex_grid_index(v);
        idx[..self.dim]
            .iter()
            .any(|&i| i == 0 || i == self.intervals)
    }

    /// Signed measure of a simplex (determinant over `d!`).
    pub fn simplex_signed_volume(&self, s: usize) -> f64 {
        let verts = self.simplex(s);
        let p0 = self.vertex(verts[0]);
        let mut jac = [[0.0; 3]; 3];
        for (c, &v) in verts[1..].iter().enumerate() {
            let p = self.vertex(v);
            for r in 0..self.dim {
                jac[r][c] = p[r] - p0[r];
            }
        }
        if self.dim == 2 {
            0.5 * (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0])
        } else {
            det3(&jac) / 6.0
        }
    }

    /// Plain-text dump: header, then vertices, then simplices.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "dim {} intervals {}", self.dim, self.intervals)?;
        writeln!(out, "vertices {}", self.num_vertices())?;
        for v in 0..self.num_vertices() {
            let coords: Vec<String> = self.vertex(v).iter().map(|x| format!("{x:.17e}")).collect();
            writeln!(out, "{}", coords.join(" "))?;
        }
        writeln!(out, "simplices {}", self.num_simplices())?;
        for s in self.simplices() {
            let ids: Vec<String> = s.iter().map(|i| i.to_string()).collect();
            writeln!(out, "{}", ids.join(" "))?;
        }
        Ok(())
    }
}

pub(crate) fn det3(j: &[[f64; 3]; 3]) -> f64 {
    j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
}

fn cell_base_vertex(dim: usize, m: usize, cell: usize) -> usize {
    let np = m + 1;
    let mut rest = cell;
    let mut base = 0;
    let mut stride = 1;
    for _ in 0..dim {
        base += (rest % m) * stride;
        rest /= m;
        stride *= np;
    }
    base
}

/// Builds the uniform mesh of the unit square (`d = 2`) or cube (`d = 3`).
pub fn build_uniform_mesh(dim: usize, m: usize) -> Result<SimplicialMesh> {
    SimplicialMesh::uniform(dim, m)
}

fn floor_power(k: f64, exponent: f64, what: &str) -> Result<usize> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::invalid(format!(
            "wavenumber must be positive, got {k}"
        )));
    }
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(Error::invalid(format!(
            "{what} exponent must lie in (0, 1], got {exponent}"
        )));
    }
    let n = (k.powf(exponent) + POWER_SLACK).floor();
    if n < 1.0 {
        return Err(Error::invalid(format!(
            "k^{exponent} = {} < 1 gives no {what}",
            k.powf(exponent)
        )));
    }
    Ok(n as usize)
}

/// Subdomains per axis, `floor(k^α)`, from `H_sub ~ k^{-α}`.
pub fn subdomains_per_dimension(k: f64, alpha: f64) -> Result<usize> {
    floor_power(k, alpha, "subdomain")
}

/// Coarse intervals per axis, `floor(k^α')`, from `H_coarse ~ k^{-α'}`.
pub fn coarse_resolution(k: f64, alpha_prime: f64) -> Result<usize> {
    floor_power(k, alpha_prime, "coarse mesh")
}

/// Smallest multiple of `n1d` that is at least `ceil(k^{3/2})`.
pub fn fine_resolution(k: f64, n1d: usize) -> usize {
    let n1d = n1d.max(1);
    let base = (k.powf(FINE_MESH_EXPONENT) - POWER_SLACK).ceil().max(1.0) as usize;
    base.div_ceil(n1d) * n1d
}

/// A coarse mesh paired with a fine mesh of the same domain.
#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    pub coarse: SimplicialMesh,
    pub fine: SimplicialMesh,
}

impl MeshHierarchy {
    pub fn new(coarse: SimplicialMesh, fine: SimplicialMesh) -> Result<Self> {
        if coarse.dim() != fine.dim() {
            return Err(Error::invalid("coarse and fine meshes differ in dimension"));
        }
        Ok(Self { coarse, fine })
    }

    /// Builds a nested pair with `fine.m = factor · coarse_m`.
    pub fn nested(dim: usize, coarse_m: usize, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::invalid("refinement factor must be positive"));
        }
        Self::new(
            SimplicialMesh::uniform(dim, coarse_m)?,
            SimplicialMesh::uniform(dim, coarse_m * factor)?,
        )
    }

    /// `fine.m / coarse.m` when the vertex sets are nested.
    pub fn refinement_factor(&self) -> Option<usize> {
        let (c, f) = (self.coarse.intervals(), self.fine.intervals());
        (f % c == 0).then_some(f / c)
    }
}

/// P1 nodal interpolation from the coarse onto the fine mesh.
///
/// Row `i` holds the values of the coarse hat functions at fine vertex `i`.
/// Nested pairs are located with exact integer arithmetic; for non-nested pairs
/// the fine vertex is located in its coarse Kuhn simplex and the barycentric
/// weights are used.
pub fn nodal_interpolation_matrix(hierarchy: &MeshHierarchy) -> Result<ComplexSparseMatrix> {
    let coarse = &hierarchy.coarse;
    let fine = &hierarchy.fine;
    let dim = fine.dim();
    let (mc, mf) = (coarse.intervals(), fine.intervals());
    let mut triplets = Vec::with_capacity(fine.num_vertices() * (dim + 1));
    for v in 0..fine.num_vertices() {
        let idx = fine.vertex_grid_index(v);
        let mut cell = [0usize; 3];
        let mut t = [0.0f64; 3];
        for a in 0..dim {
            // position along the axis in coarse units: idx·mc / mf
            let q = idx[a] * mc;
            let (mut c, mut r) = (q / mf, q % mf);
            if c == mc {
                c = mc - 1;
                r = mf;
            }
            cell[a] = c;
            t[a] = r as f64 / mf as f64;
        }
        let mut order: Vec<usize> = (0..dim).collect();
        // descending local coordinate, ties by axis so the walk is deterministic
        order.sort_by(|&a, &b| t[b].total_cmp(&t[a]).then(a.cmp(&b)));
        let mut corner = cell;
        let mut prev = 1.0;
        for step in 0..=dim {
            let next = if step < dim { t[order[step]] } else { 0.0 };
            let w = prev - next;
            if w > 0.0 {
                triplets.push((v, coarse.vertex_at(&corner), C64::new(w, 0.0)));
            }
            if step < dim {
                corner[order[step]] += 1;
            }
            prev = next;
        }
    }
    ComplexSparseMatrix::from_triplets(fine.num_vertices(), coarse.num_vertices(), &triplets)
}

//! Dense reference algebra for oracle checks, independent of the library's
//! solvers.
#![allow(dead_code, clippy::needless_range_loop)]

use helmdd::sparse::ComplexSparseMatrix;
use helmdd::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<C64>>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(r: usize, cols: usize) -> Dense {
    vec![vec![c(0.0, 0.0); cols]; r]
}

pub fn eye(n: usize) -> Dense {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn dense(a: &ComplexSparseMatrix) -> Dense {
    let mut m = zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.iter() {
        m[i][j] += v;
    }
    m
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, p) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = zeros(n, p);
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            if x == c(0.0, 0.0) {
                continue;
            }
            for j in 0..p {
                out[i][j] += x * b[l][j];
            }
        }
    }
    out
}

pub fn matvec(a: &Dense, x: &[C64]) -> Vec<C64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn adjoint(a: &Dense) -> Dense {
    let (r, cols) = (a.len(), a.first().map_or(0, Vec::len));
    let mut out = zeros(cols, r);
    for i in 0..r {
        for j in 0..cols {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

pub fn add(a: &Dense, b: &Dense, sb: C64) -> Dense {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + sb * y).collect())
        .collect()
}

/// Gauss–Jordan with partial pivoting on `[A | B]`; returns `A⁻¹ B`.
pub fn solve_dense(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let p = b.first().map_or(0, Vec::len);
    let mut m: Dense = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb).copied().collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm()))
            .unwrap();
        assert!(m[piv][col].norm() > 0.0, "singular dense matrix");
        m.swap(col, piv);
        let d = m[col][col];
        for v in m[col].iter_mut() {
            *v /= d;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col {
                let f = row[col];
                if f != c(0.0, 0.0) {
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        *x -= f * y;
                    }
                }
            }
        }
    }
    m.into_iter().map(|row| row[n..n + p].to_vec()).collect()
}

pub fn inverse(a: &Dense) -> Dense {
    solve_dense(a, &eye(a.len()))
}

/// Determinant by elimination with partial pivoting.
pub fn det(a: &Dense) -> C64 {
    let n = a.len();
    let mut m = a.clone();
    let mut d = c(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm()))
            .unwrap();
        if m[piv][col].norm() == 0.0 {
            return c(0.0, 0.0);
        }
        if piv != col {
            m.swap(col, piv);
            d = -d;
        }
        d *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for j in col..n {
                let t = m[col][j];
                m[r][j] -= f * t;
            }
        }
    }
    d
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius(a: &Dense) -> f64 {
    a.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_diff(x: &[C64], y: &[C64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

pub fn random_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Random sparse matrix with a dominant diagonal plus `extra` off-diagonal
/// entries per row.
pub fn random_sparse(n: usize, extra: usize, seed: u64) -> ComplexSparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    for i in 0..n {
        t.push((
            i,
            i,
            c(
                4.0 + rng.random_range(0.0..1.0),
                rng.random_range(-1.0..1.0),
            ),
        ));
        for _ in 0..extra {
            let j = rng.random_range(0..n);
            t.push((
                i,
                j,
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            ));
        }
    }
    ComplexSparseMatrix::from_triplets(n, n, &t).unwrap()
}

pub mod oracle;

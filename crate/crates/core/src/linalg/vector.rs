//! Deterministic vector kernels.
//!
//! Reductions are split into fixed-size chunks whose partial sums are combined
//! in chunk order, so results are bitwise independent of the thread count.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

const CHUNK: usize = 8192;

/// `x* y = Σ conj(x_i) y_i`.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    let partial = |(a, b): (&[C64], &[C64])| {
        a.iter()
            .zip(b)
            .fold(C64::new(0.0, 0.0), |acc, (u, v)| acc + u.conj() * v)
    };
    if x.len() <= CHUNK {
        return partial((x, y));
    }
    let parts: Vec<C64> = x
        .par_chunks(CHUNK)
        .zip(y.par_chunks(CHUNK))
        .map(partial)
        .collect();
    parts.into_iter().fold(C64::new(0.0, 0.0), |a, b| a + b)
}

pub fn norm(x: &[C64]) -> f64 {
    let partial = |a: &[C64]| a.iter().map(|v| v.norm_sqr()).sum::<f64>();
    if x.len() <= CHUNK {
        return partial(x).sqrt();
    }
    let parts: Vec<f64> = x.par_chunks(CHUNK).map(partial).collect();
    parts.into_iter().sum::<f64>().sqrt()
}

/// `y += a x`.
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    if y.len() <= CHUNK {
        y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
    } else {
        y.par_chunks_mut(CHUNK)
            .zip(x.par_chunks(CHUNK))
            .for_each(|(yc, xc)| yc.iter_mut().zip(xc).for_each(|(yi, xi)| *yi += a * xi));
    }
}

pub fn scale(a: C64, x: &mut [C64]) {
    x.iter_mut().for_each(|v| *v *= a);
}

/// `x - y`.
pub fn sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

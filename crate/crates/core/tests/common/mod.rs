#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smoothsvm::{CsrMatrix, Dataset};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random CSR matrix with roughly `density` of its entries stored.
pub fn random_csr(rng: &mut ChaCha8Rng, n: usize, p: usize, density: f64) -> CsrMatrix {
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|_| {
            let mut row = Vec::new();
            for c in 0..p {
                if rng.random_bool(density) {
                    row.push((c, rng.random_range(-2.0..2.0)));
                }
            }
            row
        })
        .collect();
    CsrMatrix::from_rows(p, &rows).unwrap()
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize, density: f64) -> Dataset {
    let x = random_csr(rng, n, p, density);
    let y = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    Dataset::new(x, y).unwrap()
}

pub fn random_vec(rng: &mut ChaCha8Rng, p: usize, scale: f64) -> Vec<f64> {
    (0..p).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn dense(m: &CsrMatrix) -> DMatrix<f64> {
    let rows = m.to_dense();
    DMatrix::from_fn(m.n_rows(), m.n_cols(), |i, j| rows[i][j])
}

/// `λI + (1/n)XᵀDX` assembled densely.
pub fn dense_hessian(lambda: f64, m: &CsrMatrix, d: &[f64]) -> DMatrix<f64> {
    let x = dense(m);
    let n = m.n_rows() as f64;
    let dm = DMatrix::from_diagonal(&DVector::from_column_slice(d));
    DMatrix::identity(m.n_cols(), m.n_cols()) * lambda + x.transpose() * dm * &x / n
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-300);
    num / den
}

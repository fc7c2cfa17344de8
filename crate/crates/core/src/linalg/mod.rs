//! Sparse complex symmetric linear algebra.

mod cocg;
mod ldlt;

pub use cocg::{cocg, CocgOptions, CocgResult};
pub use ldlt::{LdltFactor, LdltSymbolic};

use num_complex::Complex64;
use rayon::prelude::*;

/// Square sparse matrix in compressed sparse column form with sorted row
/// indices. Both triangles are stored.
#[derive(Clone, Debug)]
pub struct CscMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl CscMatrix {
    /// Pattern from (row, col) pairs; values start at zero. Duplicates merge.
    pub fn from_pattern(n: usize, mut entries: Vec<(usize, usize)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c)| (c, r));
        entries.dedup();
        let mut col_ptr = vec![0usize; n + 1];
        for &(_, c) in &entries {
            col_ptr[c + 1] += 1;
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let row_idx = entries.iter().map(|&(r, _)| r).collect();
        let nnz = entries.len();
        Self { n, col_ptr, row_idx, values: vec![Complex64::new(0.0, 0.0); nnz] }
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Position of entry (r, c) in `values`.
    pub fn find(&self, r: usize, c: usize) -> Option<usize> {
        let s = self.col_ptr[c];
        let e = self.col_ptr[c + 1];
        self.row_idx[s..e].binary_search(&r).ok().map(|k| s + k)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        // The matrix is symmetric, so y_r = Σ_c A[c][r] x_c = column-wise dot products.
        (0..self.n)
            .into_par_iter()
            .map(|c| {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                    acc += self.values[k] * x[self.row_idx[k]];
                }
                acc
            })
            .collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|c| self.find(c, c).map_or(Complex64::new(0.0, 0.0), |k| self.values[k])).collect()
    }

    /// ‖A − Aᵀ‖_F / ‖A‖_F.
    pub fn asymmetry(&self) -> f64 {
        let mut diff = 0.0;
        let mut total = 0.0;
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[k];
                let v = self.values[k];
                total += v.norm_sqr();
                let t = self.find(c, r).map_or(Complex64::new(0.0, 0.0), |j| self.values[j]);
                diff += (v - t).norm_sqr();
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (diff / total).sqrt()
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖b − A x‖ / ‖b‖ (0 when b = 0 and x = 0).
pub fn relative_residual(a: &CscMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let ax = a.matvec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (q - p).norm_sqr()).sum::<f64>().sqrt();
    let nb = norm2(b);
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

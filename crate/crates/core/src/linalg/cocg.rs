//! Conjugate orthogonal conjugate gradient (COCG) for complex symmetric systems.

use num_complex::Complex64;

use super::{norm2, CscMatrix};
use crate::error::{MptError, Result};

#[derive(Clone, Copy, Debug)]
pub struct CocgOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CocgOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 20_000 }
    }
}

#[derive(Clone, Debug)]
pub struct CocgResult {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

fn bilinear(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Jacobi-preconditioned COCG. Uses the unconjugated bilinear form xᵀy, which
/// is the natural inner product for complex symmetric A.
pub fn cocg(a: &CscMatrix, b: &[Complex64], opts: &CocgOptions) -> Result<CocgResult> {
    let n = a.n;
    let nb = norm2(b);
    if nb == 0.0 {
        return Ok(CocgResult { x: vec![Complex64::new(0.0, 0.0); n], iterations: 0, residual: 0.0, history: vec![0.0] });
    }
    let dinv: Vec<Complex64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d.norm() > 0.0 { d.inv() } else { Complex64::new(1.0, 0.0) })
        .collect();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut r = b.to_vec();
    let mut z: Vec<Complex64> = r.iter().zip(&dinv).map(|(p, q)| p * q).collect();
    let mut p = z.clone();
    let mut rho = bilinear(&r, &z);
    let mut history = vec![1.0];
    for it in 1..=opts.max_iter {
        let q = a.matvec(&p);
        let mu = bilinear(&p, &q);
        if mu.norm() == 0.0 || rho.norm() == 0.0 {
            break;
        }
        let alpha = rho / mu;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let res = norm2(&r) / nb;
        history.push(res);
        if res <= opts.tol {
            return Ok(CocgResult { x, iterations: it, residual: res, history });
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rho_new = bilinear(&r, &z);
        let beta = rho_new / rho;
        rho = rho_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let last = *history.last().unwrap_or(&f64::NAN);
    Err(MptError::NonConvergence { iterations: opts.max_iter, last, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{relative_residual, LdltFactor, LdltSymbolic};

    #[test]
    fn agrees_with_direct_solver() {
        let n = 6;
        let id = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        let mut pat = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    pat.push((id(i, j, k), id(i, j, k)));
                    if i + 1 < n {
                        pat.push((id(i, j, k), id(i + 1, j, k)));
                        pat.push((id(i + 1, j, k), id(i, j, k)));
                    }
                }
            }
        }
        let mut a = CscMatrix::from_pattern(n * n * n, pat);
        for c in 0..a.n {
            for k in a.col_ptr[c]..a.col_ptr[c + 1] {
                a.values[k] = if a.row_idx[k] == c { Complex64::new(3.0, -0.7) } else { Complex64::new(-1.0, 0.0) };
            }
        }
        let b: Vec<Complex64> = (0..a.n).map(|i| Complex64::new(1.0, i as f64 * 0.01)).collect();
        let it = cocg(&a, &b, &CocgOptions { tol: 1e-12, max_iter: 1000 }).unwrap();
        assert!(relative_residual(&a, &it.x, &b) < 1e-11);
        let f = LdltFactor::factorize(LdltSymbolic::analyze(&a).unwrap(), &a).unwrap();
        let x = f.solve(&b);
        let diff: f64 = x.iter().zip(&it.x).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff / norm2(&x) < 1e-10);
    }
}

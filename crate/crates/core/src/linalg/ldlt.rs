//! Multifrontal complex symmetric LDLᵀ without pivoting.
//!
//! The symbolic phase (AMD ordering, supernodal elimination tree) is taken
//! from faer's Cholesky analysis. The numeric phase factors each supernode's
//! dense front and passes Schur complements up the tree. No pivoting is
//! needed for matrices of the form K − iM with K ⪰ 0 and M ≻ 0 restricted to
//! ker K, which is what the eddy-current discretization produces.

use std::sync::Arc;

use faer::linalg::matmul::triangular::{matmul as trimatmul, BlockStructure};
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, SymbolicCholeskyRaw, SymmetricOrdering,
};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::SymbolicSparseColMatRef;
use faer::{Accum, Mat, Par, Side, Unbind};
use num_complex::Complex64;

use super::CscMatrix;
use crate::error::{MptError, Result};

const BLOCK: usize = 64;

/// Ordering and supernode structure, reusable for any matrix with the same pattern.
pub struct LdltSymbolic {
    n: usize,
    /// new index i holds old index fwd[i]
    fwd: Vec<usize>,
    begin: Vec<usize>,
    end: Vec<usize>,
    patterns: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    /// For each permuted column: (permuted row ≥ column, index into the CSC values).
    lower: Vec<Vec<(usize, usize)>>,
    nnz: usize,
}

impl LdltSymbolic {
    pub fn analyze(a: &CscMatrix) -> Result<Arc<Self>> {
        let n = a.n;
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &a.col_ptr, None, &a.row_idx);
        let chol = factorize_symbolic_cholesky(sym, Side::Lower, SymmetricOrdering::Amd, CholeskySymbolicParams {
            supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
            ..Default::default()
        })
            .map_err(|e| MptError::Solver(format!("symbolic analysis failed: {e:?}")))?;
        let (fwd, inv) = match chol.perm() {
            Some(p) => {
                let (f, i) = p.arrays();
                (f.iter().map(|x| x.unbound()).collect::<Vec<_>>(), i.iter().map(|x| x.unbound()).collect::<Vec<_>>())
            }
            None => ((0..n).collect(), (0..n).collect()),
        };
        let SymbolicCholeskyRaw::Supernodal(sn) = chol.raw() else {
            return Err(MptError::Solver("expected a supernodal symbolic factorization".into()));
        };
        let ns = sn.n_supernodes();
        let begin: Vec<usize> = sn.supernode_begin().iter().map(|x| x.unbound()).collect::<Vec<_>>()[..ns].to_vec();
        let end: Vec<usize> = sn.supernode_end().iter().map(|x| x.unbound()).collect::<Vec<_>>()[..ns].to_vec();
        let patterns: Vec<Vec<usize>> = (0..ns).map(|s| sn.supernode(s).pattern().iter().map(|x| x.unbound()).collect()).collect();
        let mut col2sn = vec![0; n];
        for s in 0..ns {
            for c in begin[s]..end[s] {
                col2sn[c] = s;
            }
        }
        let mut children = vec![Vec::new(); ns];
        for s in 0..ns {
            if let Some(&p) = patterns[s].first() {
                children[col2sn[p]].push(s);
            }
        }
        let mut lower = vec![Vec::new(); n];
        for oc in 0..n {
            let nc = inv[oc];
            for k in a.col_ptr[oc]..a.col_ptr[oc + 1] {
                let nr = inv[a.row_idx[k]];
                if nr >= nc {
                    lower[nc].push((nr, k));
                }
            }
        }
        let nnz = (0..ns).map(|s| (end[s] - begin[s]) * (end[s] - begin[s] + 1) / 2 + (end[s] - begin[s]) * patterns[s].len()).sum();
        Ok(Arc::new(Self { n, fwd, begin, end, patterns, children, lower, nnz }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries of L (including the unit diagonal).
    pub fn factor_nnz(&self) -> usize {
        self.nnz
    }
}

/// Numeric factor with Pᵀ A P = L D Lᵀ.
pub struct LdltFactor {
    sym: Arc<LdltSymbolic>,
    panels: Vec<Mat<Complex64>>,
    d: Vec<Complex64>,
}

impl LdltFactor {
    pub fn factorize(sym: Arc<LdltSymbolic>, a: &CscMatrix) -> Result<Self> {
        if a.n != sym.n {
            return Err(MptError::Solver("matrix size does not match symbolic analysis".into()));
        }
        let n = sym.n;
        let ns = sym.begin.len();
        let mut pos = vec![usize::MAX; n];
        let mut updates: Vec<Option<Mat<Complex64>>> = (0..ns).map(|_| None).collect();
        let mut panels = Vec::with_capacity(ns);
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        for s in 0..ns {
            let (b, e) = (sym.begin[s], sym.end[s]);
            let nc = e - b;
            let pat = &sym.patterns[s];
            let m = nc + pat.len();
            for c in b..e {
                pos[c] = c - b;
            }
            for (k, &r) in pat.iter().enumerate() {
                pos[r] = nc + k;
            }
            let mut f = Mat::<Complex64>::zeros(m, m);
            for c in b..e {
                for &(r, k) in &sym.lower[c] {
                    f[(pos[r], c - b)] += a.values[k];
                }
            }
            for &ch in &sym.children[s] {
                let u = updates[ch].take().expect("child update consumed once");
                let idx: Vec<usize> = sym.patterns[ch].iter().map(|&r| pos[r]).collect();
                for j in 0..idx.len() {
                    let pj = idx[j];
                    for i in j..idx.len() {
                        f[(idx[i], pj)] += u[(i, j)];
                    }
                }
            }
            let par = if m >= 512 { Par::rayon(0) } else { Par::Seq };
            let mut kb = 0;
            while kb < nc {
                let ke = (kb + BLOCK).min(nc);
                for k in kb..ke {
                    let dk = f[(k, k)];
                    if dk.norm() == 0.0 || !dk.re.is_finite() || !dk.im.is_finite() {
                        return Err(MptError::Solver(format!("zero or non-finite pivot at column {}", b + k)));
                    }
                    d[b + k] = dk;
                    let dinv = dk.inv();
                    for i in k + 1..m {
                        f[(i, k)] *= dinv;
                    }
                    for j in k + 1..ke {
                        let ljd = f[(j, k)] * dk;
                        for i in j..m {
                            let l = f[(i, k)];
                            f[(i, j)] -= l * ljd;
                        }
                    }
                }
                if ke < m {
                    let l_blk = f.as_ref().submatrix(ke, kb, m - ke, ke - kb).to_owned();
                    let mut w = l_blk.clone();
                    for jj in 0..ke - kb {
                        let dj = d[b + kb + jj];
                        for i in 0..m - ke {
                            w[(i, jj)] *= dj;
                        }
                    }
                    let f22 = f.as_mut().submatrix_mut(ke, ke, m - ke, m - ke);
                    trimatmul(
                        f22,
                        BlockStructure::TriangularLower,
                        Accum::Add,
                        w.as_ref(),
                        BlockStructure::Rectangular,
                        l_blk.transpose(),
                        BlockStructure::Rectangular,
                        Complex64::new(-1.0, 0.0),
                        par,
                    );
                }
                kb = ke;
            }
            if m > nc {
                updates[s] = Some(f.as_ref().submatrix(nc, nc, m - nc, m - nc).to_owned());
            }
            panels.push(f.as_ref().submatrix(0, 0, m, nc).to_owned());
        }
        Ok(Self { sym, panels, d })
    }

    pub fn symbolic(&self) -> &Arc<LdltSymbolic> {
        &self.sym
    }

    /// Solves A x = b for one right-hand side.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let sym = &*self.sym;
        let n = sym.n;
        let mut x: Vec<Complex64> = (0..n).map(|i| b[sym.fwd[i]]).collect();
        for (s, l) in self.panels.iter().enumerate() {
            let (bg, e) = (sym.begin[s], sym.end[s]);
            let nc = e - bg;
            let pat = &sym.patterns[s];
            for k in 0..nc {
                let xk = x[bg + k];
                if xk == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in k + 1..nc {
                    x[bg + i] -= l[(i, k)] * xk;
                }
                for (pi, &r) in pat.iter().enumerate() {
                    x[r] -= l[(nc + pi, k)] * xk;
                }
            }
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for (s, l) in self.panels.iter().enumerate().rev() {
            let (bg, e) = (sym.begin[s], sym.end[s]);
            let nc = e - bg;
            let pat = &sym.patterns[s];
            for k in (0..nc).rev() {
                let mut acc = x[bg + k];
                for i in k + 1..nc {
                    acc -= l[(i, k)] * x[bg + i];
                }
                for (pi, &r) in pat.iter().enumerate() {
                    acc -= l[(nc + pi, k)] * x[r];
                }
                x[bg + k] = acc;
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            out[sym.fwd[i]] = x[i];
        }
        out
    }

    /// Solve followed by iterative refinement until the relative residual is
    /// at most `tol` or `max_steps` corrections were applied. Returns the
    /// solution and its relative residual.
    pub fn solve_refined(&self, a: &CscMatrix, b: &[Complex64], tol: f64, max_steps: usize) -> (Vec<Complex64>, f64) {
        let nb = super::norm2(b);
        if nb == 0.0 {
            return (vec![Complex64::new(0.0, 0.0); b.len()], 0.0);
        }
        let mut x = self.solve(b);
        let mut res = super::relative_residual(a, &x, b);
        for _ in 0..max_steps {
            if res <= tol {
                break;
            }
            let ax = a.matvec(&x);
            let r: Vec<Complex64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let dx = self.solve(&r);
            let cand: Vec<Complex64> = x.iter().zip(&dx).map(|(p, q)| p + q).collect();
            let cres = super::relative_residual(a, &cand, b);
            if cres >= res {
                break;
            }
            x = cand;
            res = cres;
        }
        (x, res)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 3D 7-point Laplacian with a complex shift, n³ unknowns.
    pub(crate) fn shifted_laplacian(n: usize, shift: Complex64) -> CscMatrix {
        let id = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        let mut pattern = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = id(i, j, k);
                    pattern.push((r, r));
                    if i + 1 < n {
                        pattern.push((r, id(i + 1, j, k)));
                        pattern.push((id(i + 1, j, k), r));
                    }
                    if j + 1 < n {
                        pattern.push((r, id(i, j + 1, k)));
                        pattern.push((id(i, j + 1, k), r));
                    }
                    if k + 1 < n {
                        pattern.push((r, id(i, j, k + 1)));
                        pattern.push((id(i, j, k + 1), r));
                    }
                }
            }
        }
        let mut a = CscMatrix::from_pattern(n * n * n, pattern);
        for c in 0..a.n {
            for k in a.col_ptr[c]..a.col_ptr[c + 1] {
                a.values[k] = if a.row_idx[k] == c { Complex64::new(6.0, 0.0) + shift } else { Complex64::new(-1.0, 0.0) };
            }
        }
        a
    }

    #[test]
    fn solves_shifted_laplacian() {
        let a = shifted_laplacian(9, Complex64::new(0.0, -0.5));
        let sym = LdltSymbolic::analyze(&a).unwrap();
        let f = LdltFactor::factorize(sym, &a).unwrap();
        let b: Vec<Complex64> = (0..a.n).map(|i| Complex64::new((i % 7) as f64, (i % 3) as f64 - 1.0)).collect();
        let (x, res) = f.solve_refined(&a, &b, 1e-12, 3);
        assert!(res < 1e-12, "residual {res}");
        assert!(super::super::relative_residual(&a, &x, &b) < 1e-12);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = shifted_laplacian(4, Complex64::new(0.1, -1.0));
        let f = LdltFactor::factorize(LdltSymbolic::analyze(&a).unwrap(), &a).unwrap();
        let (x, res) = f.solve_refined(&a, &vec![Complex64::new(0.0, 0.0); a.n], 1e-10, 2);
        assert!(x.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        assert_eq!(res, 0.0);
    }
}

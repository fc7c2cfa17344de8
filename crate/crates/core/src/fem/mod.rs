//! Edge-element discretization of the θ_k transmission problems.
//!
//! For k = 1, 2, 3 the discrete problem is: find θ with zero tangential trace
//! on the truncation boundary such that for every test function v
//!
//! ```text
//!   Σ_T μ_r⁻¹ (∇×θ, ∇×v)_T − i Σ_T ν̃_T (θ, v)_T
//!     = i Σ_n ν_n (e_k×ξ, v)_{B_n} + Σ_n 2(1 − μ_r⁻¹) (e_k, ∇×v)_{B_n}
//! ```
//!
//! with ν̃ = ν in conducting regions and ν̃ = eps_reg wherever ν = 0 (free
//! space and non-conducting object regions). The interface jump datum is
//! carried by the last volume term after integration by parts.

mod element;

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use element::ElementGeometry;

use crate::error::{MptError, Result};
use crate::linalg::{cocg, relative_residual, CocgOptions, CscMatrix, LdltFactor, LdltSymbolic};
use crate::mesh::TetMesh;
use crate::model::{compute_nu, Material};
use crate::tensor::{dot3, sub3, Vec3};

const NO_DOF: usize = usize::MAX;
const CHUNK: usize = 4096;

/// Default regularization: 1e-8·ν_max with ν_max clamped to [1e-2, 1], or
/// 1e-8 when nothing conducts. The clamp keeps the gauge term small relative
/// to the curl-curl operator on large truncation domains at high ν, and keeps
/// pivots representable when ν is tiny.
pub fn default_eps_reg(nu: &[f64]) -> f64 {
    let nu_max = nu.iter().copied().fold(0.0, f64::max);
    if nu_max == 0.0 {
        1e-8
    } else {
        1e-8 * nu_max.clamp(1e-2, 1.0)
    }
}

/// Region data indexed by tag (tag 0 = free space).
#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionProblem {
    pub mu_r: Vec<f64>,
    pub nu: Vec<f64>,
    pub eps_reg: f64,
}

impl TransmissionProblem {
    /// `materials[n - 1]` is the material of region tag n.
    pub fn new(mesh: &TetMesh, materials: &[Material], alpha: f64, omega: f64) -> Result<Self> {
        let mut nu = vec![0.0];
        for m in materials {
            nu.push(compute_nu(m, alpha, omega)?.value);
        }
        let mut mu_r = vec![1.0];
        mu_r.extend(materials.iter().map(|m| m.mu_r));
        Self::from_parts(mesh, mu_r, nu, None)
    }

    /// Explicit per-tag parameters; `eps_reg = None` selects [`default_eps_reg`].
    pub fn from_parts(mesh: &TetMesh, mu_r: Vec<f64>, nu: Vec<f64>, eps_reg: Option<f64>) -> Result<Self> {
        let needed = mesh.max_tag() as usize + 1;
        if mu_r.len() < needed || nu.len() < needed {
            return Err(MptError::InvalidArgument(format!(
                "mesh has region tags up to {}, but only {} region materials were given",
                needed - 1,
                mu_r.len().min(nu.len()).saturating_sub(1)
            )));
        }
        if mu_r[0] != 1.0 || nu[0] != 0.0 {
            return Err(MptError::InvalidArgument("free space (tag 0) must have mu_r = 1 and nu = 0".into()));
        }
        if mu_r.iter().any(|m| !(*m > 0.0 && m.is_finite())) || nu.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(MptError::InvalidArgument("mu_r must be > 0 and nu >= 0 in every region".into()));
        }
        let eps_reg = eps_reg.unwrap_or_else(|| default_eps_reg(&nu));
        if !(eps_reg > 0.0) {
            return Err(MptError::InvalidArgument("eps_reg must be > 0".into()));
        }
        Ok(Self { mu_r, nu, eps_reg })
    }

    /// The same problem at ω = 0 (all ν set to zero, default regularization).
    pub fn static_limit(&self) -> Self {
        let nu = vec![0.0; self.nu.len()];
        Self { mu_r: self.mu_r.clone(), eps_reg: default_eps_reg(&nu), nu }
    }

    fn mass_coefficient(&self, tag: usize) -> f64 {
        if self.nu[tag] > 0.0 {
            self.nu[tag]
        } else {
            self.eps_reg
        }
    }
}

/// Degree-of-freedom layout and sparsity pattern of a mesh, shared across
/// frequencies. The symbolic factorization is computed once on first use.
pub struct FemSpace {
    pub mesh: Arc<TetMesh>,
    dof_of_edge: Vec<usize>,
    n_dofs: usize,
    pattern: CscMatrix,
    symbolic: OnceLock<Arc<LdltSymbolic>>,
}

impl FemSpace {
    pub fn new(mesh: Arc<TetMesh>) -> Self {
        let mut dof_of_edge = vec![NO_DOF; mesh.n_edges()];
        let mut n_dofs = 0;
        for (e, slot) in dof_of_edge.iter_mut().enumerate() {
            if !mesh.boundary_edge[e] {
                *slot = n_dofs;
                n_dofs += 1;
            }
        }
        let mut entries = Vec::with_capacity(mesh.n_tets() * 36);
        for te in &mesh.tet_edges {
            for &a in te {
                for &b in te {
                    let (da, db) = (dof_of_edge[a], dof_of_edge[b]);
                    if da != NO_DOF && db != NO_DOF {
                        entries.push((da, db));
                    }
                }
            }
        }
        let pattern = CscMatrix::from_pattern(n_dofs, entries);
        Self { mesh, dof_of_edge, n_dofs, pattern, symbolic: OnceLock::new() }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn nnz(&self) -> usize {
        self.pattern.nnz()
    }

    pub fn dof_of_edge(&self, edge: usize) -> Option<usize> {
        let d = self.dof_of_edge[edge];
        (d != NO_DOF).then_some(d)
    }

    fn symbolic(&self) -> Result<Arc<LdltSymbolic>> {
        if let Some(s) = self.symbolic.get() {
            return Ok(s.clone());
        }
        let s = LdltSymbolic::analyze(&self.pattern)?;
        Ok(self.symbolic.get_or_init(|| s).clone())
    }

    /// Global DoF vector to per-edge coefficients (boundary edges are zero).
    pub fn expand(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.dof_of_edge.iter().map(|&d| if d == NO_DOF { Complex64::new(0.0, 0.0) } else { x[d] }).collect()
    }
}

/// Assembled matrix and the three right-hand sides.
pub struct LinearSystem {
    pub matrix: CscMatrix,
    pub rhs: [Vec<Complex64>; 3],
}

struct ElementContribution {
    a: [[Complex64; 6]; 6],
    b: [[Complex64; 6]; 3],
}

fn element_contribution(mesh: &TetMesh, problem: &TransmissionProblem, t: usize) -> Result<ElementContribution> {
    let geo = ElementGeometry::new(mesh.tet_vertices(t)).ok_or_else(|| MptError::Mesh(format!("tet {t} has a singular Jacobian")))?;
    let tag = mesh.tags[t] as usize;
    let s = &mesh.tet_signs[t];
    let inv_mu = 1.0 / problem.mu_r[tag];
    let mass_coef = problem.mass_coefficient(tag);
    let k = geo.curl_curl();
    let m = geo.mass();
    let mut a = [[Complex64::new(0.0, 0.0); 6]; 6];
    for e in 0..6 {
        for f in 0..6 {
            a[e][f] = Complex64::new(inv_mu * k[e][f], -mass_coef * m[e][f]) * (s[e] * s[f]);
        }
    }
    let mut b = [[Complex64::new(0.0, 0.0); 6]; 3];
    if tag != 0 {
        let nu = problem.nu[tag];
        let jump = 2.0 * (1.0 - inv_mu);
        let load = geo.moment_load();
        let curls = geo.curls();
        for kk in 0..3 {
            for e in 0..6 {
                let curl_term = jump * geo.volume * curls[e][kk];
                b[kk][e] = Complex64::new(curl_term, nu * load[kk][e]) * s[e];
            }
        }
    }
    Ok(ElementContribution { a, b })
}

/// Assembles the system for `problem` on `space`. Element integrals are
/// computed in parallel and scattered in tet order, so the result does not
/// depend on the thread count.
pub fn assemble(space: &FemSpace, problem: &TransmissionProblem) -> Result<LinearSystem> {
    let mesh = &*space.mesh;
    if problem.mu_r.len() <= mesh.max_tag() as usize {
        return Err(MptError::InvalidArgument("problem has fewer regions than the mesh".into()));
    }
    let mut matrix = space.pattern.clone();
    let zero = Complex64::new(0.0, 0.0);
    let mut rhs = [vec![zero; space.n_dofs], vec![zero; space.n_dofs], vec![zero; space.n_dofs]];
    let n = mesh.n_tets();
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let contribs: Vec<ElementContribution> =
            (start..end).into_par_iter().map(|t| element_contribution(mesh, problem, t)).collect::<Result<_>>()?;
        for (off, c) in contribs.iter().enumerate() {
            let te = &mesh.tet_edges[start + off];
            for f in 0..6 {
                let col = space.dof_of_edge[te[f]];
                if col == NO_DOF {
                    continue;
                }
                for e in 0..6 {
                    let row = space.dof_of_edge[te[e]];
                    if row == NO_DOF {
                        continue;
                    }
                    let pos = matrix.find(row, col).expect("pattern covers element couplings");
                    matrix.values[pos] += c.a[e][f];
                }
                for k in 0..3 {
                    rhs[k][col] += c.b[k][f];
                }
            }
        }
        start = end;
    }
    Ok(LinearSystem { matrix, rhs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Direct below `iterative_threshold` DoFs, iterative above.
    Auto,
    Direct,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub kind: SolverKind,
    pub direct_tol: f64,
    pub iterative_tol: f64,
    pub max_iter: usize,
    pub iterative_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { kind: SolverKind::Auto, direct_tol: 1e-10, iterative_tol: 1e-8, max_iter: 50_000, iterative_threshold: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSolution {
    /// Coefficient per global edge; zero on the truncation boundary.
    pub coeffs: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
}

impl EdgeSolution {
    pub fn zero(mesh: &TetMesh) -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0); mesh.n_edges()], residual: 0.0, iterations: 0 }
    }

    /// Coefficients of tet `t` in local edge order, with orientation signs applied.
    pub fn local(&self, mesh: &TetMesh, t: usize) -> [Complex64; 6] {
        let mut out = [Complex64::new(0.0, 0.0); 6];
        for e in 0..6 {
            out[e] = self.coeffs[mesh.tet_edges[t][e]] * mesh.tet_signs[t][e];
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverDiagnostics {
    pub dof_count: usize,
    pub nnz: usize,
    pub residual: f64,
    pub factor_time_s: f64,
    pub solve_time_s: f64,
}

/// Solves the three right-hand sides, sharing one factorization.
pub fn solve(space: &FemSpace, system: &LinearSystem, opts: &SolverOptions) -> Result<([EdgeSolution; 3], SolverDiagnostics)> {
    let n = space.n_dofs;
    let iterative = match opts.kind {
        SolverKind::Direct => false,
        SolverKind::Iterative => true,
        SolverKind::Auto => n > opts.iterative_threshold,
    };
    let mut diag = SolverDiagnostics { dof_count: n, nnz: system.matrix.nnz(), residual: 0.0, factor_time_s: 0.0, solve_time_s: 0.0 };
    let mut out: Vec<EdgeSolution> = Vec::with_capacity(3);
    if iterative {
        let t0 = Instant::now();
        for b in &system.rhs {
            let r = cocg(&system.matrix, b, &CocgOptions { tol: opts.iterative_tol, max_iter: opts.max_iter })?;
            diag.residual = diag.residual.max(r.residual);
            out.push(EdgeSolution { coeffs: space.expand(&r.x), residual: r.residual, iterations: r.iterations });
        }
        diag.solve_time_s = t0.elapsed().as_secs_f64();
    } else {
        let t0 = Instant::now();
        let factor = if system.rhs.iter().all(|b| b.iter().all(|v| *v == Complex64::new(0.0, 0.0))) {
            None
        } else {
            Some(LdltFactor::factorize(space.symbolic()?, &system.matrix)?)
        };
        diag.factor_time_s = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        for b in &system.rhs {
            let (x, res) = match &factor {
                Some(f) => f.solve_refined(&system.matrix, b, opts.direct_tol, 4),
                None => (vec![Complex64::new(0.0, 0.0); n], 0.0),
            };
            if !(res <= opts.direct_tol) {
                return Err(MptError::Solver(format!(
                    "direct solve residual {res:e} exceeds tolerance {:e}; consider the iterative solver",
                    opts.direct_tol
                )));
            }
            diag.residual = diag.residual.max(res);
            out.push(EdgeSolution { coeffs: space.expand(&x), residual: res, iterations: 0 });
        }
        diag.solve_time_s = t1.elapsed().as_secs_f64();
    }
    let [a, b, c]: [EdgeSolution; 3] = out.try_into().expect("three right-hand sides");
    Ok(([a, b, c], diag))
}

/// Assemble and solve in one step.
pub fn solve_problem(space: &FemSpace, problem: &TransmissionProblem, opts: &SolverOptions) -> Result<([EdgeSolution; 3], SolverDiagnostics)> {
    let system = assemble(space, problem)?;
    solve(space, &system, opts)
}

/// θ_k at ω = 0: the same operator with ν = 0 everywhere.
pub fn solve_theta_zero(space: &FemSpace, problem: &TransmissionProblem, opts: &SolverOptions) -> Result<([EdgeSolution; 3], SolverDiagnostics)> {
    solve_problem(space, &problem.static_limit(), opts)
}

/// Per-tet curl of the edge interpolant over tets carrying `tag`, as (tet index, curl).
pub fn evaluate_curl(solution: &EdgeSolution, mesh: &TetMesh, tag: u32) -> Result<Vec<(usize, [Complex64; 3])>> {
    if solution.coeffs.len() != mesh.n_edges() {
        return Err(MptError::InvalidArgument(format!(
            "solution has {} coefficients but the mesh has {} edges",
            solution.coeffs.len(),
            mesh.n_edges()
        )));
    }
    let mut out = Vec::new();
    for t in 0..mesh.n_tets() {
        if mesh.tags[t] != tag {
            continue;
        }
        let geo = ElementGeometry::new(mesh.tet_vertices(t)).ok_or_else(|| MptError::Mesh(format!("tet {t} has a singular Jacobian")))?;
        let curls = geo.curls();
        let c = solution.local(mesh, t);
        let mut v = [Complex64::new(0.0, 0.0); 3];
        for e in 0..6 {
            for k in 0..3 {
                v[k] += c[e] * curls[e][k];
            }
        }
        out.push((t, v));
    }
    Ok(out)
}

/// Edge interpolant of a vector field: the tangential line integral along each
/// edge, taken with the midpoint rule (exact for affine fields).
pub fn interpolate(mesh: &TetMesh, field: impl Fn(&Vec3) -> [Complex64; 3]) -> EdgeSolution {
    let coeffs = mesh
        .edges
        .iter()
        .map(|[a, b]| {
            let (pa, pb) = (&mesh.nodes[*a], &mesh.nodes[*b]);
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]), 0.5 * (pa[2] + pb[2])];
            let t = sub3(pb, pa);
            let f = field(&mid);
            f[0] * t[0] + f[1] * t[1] + f[2] * t[2]
        })
        .collect();
    EdgeSolution { coeffs, residual: 0.0, iterations: 0 }
}

/// Relative residual of `solution` against a freshly assembled system.
pub fn check_residual(space: &FemSpace, system: &LinearSystem, k: usize, solution: &EdgeSolution) -> f64 {
    let x: Vec<Complex64> = (0..space.mesh.n_edges()).filter_map(|e| space.dof_of_edge(e).map(|_| solution.coeffs[e])).collect();
    relative_residual(&system.matrix, &x, &system.rhs[k])
}

/// Value of the edge interpolant at a point inside tet `t`.
pub fn evaluate_at(solution: &EdgeSolution, mesh: &TetMesh, t: usize, x: &Vec3) -> [Complex64; 3] {
    let geo = ElementGeometry::new(mesh.tet_vertices(t)).expect("valid tet");
    let lam: Vec<f64> = (0..4)
        .map(|i| {
            let base = if i == 0 { 1.0 } else { 0.0 };
            base + dot3(&geo.grads[i], &sub3(x, &geo.verts[0]))
        })
        .collect();
    let c = solution.local(mesh, t);
    let mut v = [Complex64::new(0.0, 0.0); 3];
    for (e, [a, b]) in crate::mesh::LOCAL_EDGES.iter().enumerate() {
        for k in 0..3 {
            v[k] += c[e] * (lam[*a] * geo.grads[*b][k] - lam[*b] * geo.grads[*a][k]);
        }
    }
    v
}

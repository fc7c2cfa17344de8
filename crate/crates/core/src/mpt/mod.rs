//! Polarizability tensors from θ_k solutions.
//!
//! ```text
//!   𝒞_jk = −(iα³/4) Σ_n ν_n e_j·∫_{B_n} ξ×(θ_k + e_k×ξ)
//!   𝒩_jk =  α³ Σ_n (1 − 1/μ_n) ∫_{B_n} (δ_jk + ½ e_j·∇×θ_k)
//!   ℳ    = −𝒞 + 𝒩
//! ```
//!
//! 𝒩⁰ is 𝒩 evaluated on the ω = 0 solve.

mod canonical;
mod output;
mod spectra;
mod sphere;

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

pub use canonical::{canonicalize, CanonicalForm, CanonicalOptions, Normalization, NU_INFINITY};
pub use output::{read_mpt_records, spectra_csv, write_mpt_records, MptJson};
pub use spectra::{count_spectral_features, spectra_of, FeatureCounts, SpectralSignature, FEATURE_NOISE_FRACTION};
pub use sphere::{mpt_sphere_analytic, sphere_polarizability};

use crate::error::{MptError, Result};
use crate::fem::{solve_problem, EdgeSolution, ElementGeometry, FemSpace, SolverDiagnostics, SolverOptions, TransmissionProblem};
use crate::mesh::TetMesh;
use crate::model::{compute_nu, omega_of, Material};
use crate::tensor::{check_orthogonal, ComplexTensor2, Mat3};

#[derive(Clone, Debug, PartialEq)]
pub struct MptRecord {
    pub frequency_hz: f64,
    pub omega: f64,
    pub alpha: f64,
    pub m: ComplexTensor2,
    pub c: ComplexTensor2,
    pub n: ComplexTensor2,
    pub n0: ComplexTensor2,
    /// ν per object region (tag 1 first).
    pub nu: Vec<f64>,
    /// ‖(ℳ − ℳᵀ)/2‖_F before symmetrization.
    pub asymmetry_norm: f64,
}

/// 𝒞, 𝒩 and ℳ from the three θ_k solutions of `problem` on `mesh`.
pub fn compute_mpt(solutions: &[EdgeSolution; 3], mesh: &TetMesh, problem: &TransmissionProblem, alpha: f64, omega: f64) -> Result<MptRecord> {
    for s in solutions {
        if s.coeffs.len() != mesh.n_edges() {
            return Err(MptError::InvalidArgument("solution does not match the mesh".into()));
        }
    }
    if problem.mu_r.len() <= mesh.max_tag() as usize {
        return Err(MptError::InvalidArgument("problem has fewer regions than the mesh".into()));
    }
    let object_tets: Vec<usize> = (0..mesh.n_tets()).filter(|&t| mesh.tags[t] != 0).collect();
    let zero = Complex64::new(0.0, 0.0);
    // Per tet: (Σ over j,k of the 𝒞 integrand without prefactor, 𝒩 integrand).
    let parts: Vec<([[Complex64; 3]; 3], [[Complex64; 3]; 3])> = object_tets
        .par_iter()
        .map(|&t| {
            let geo = ElementGeometry::new(mesh.tet_vertices(t)).expect("mesh tets are valid");
            let tag = mesh.tags[t] as usize;
            let nu = problem.nu[tag];
            let chi = 1.0 - 1.0 / problem.mu_r[tag];
            let curls = geo.curls();
            let xcross = geo.position_cross_basis();
            let s = geo.second_moment();
            let trace = s[0][0] + s[1][1] + s[2][2];
            let mut cpart = [[zero; 3]; 3];
            let mut npart = [[zero; 3]; 3];
            for k in 0..3 {
                let c = solutions[k].local(mesh, t);
                for j in 0..3 {
                    if nu != 0.0 {
                        let mut v = Complex64::new(if j == k { trace } else { 0.0 } - s[j][k], 0.0);
                        for e in 0..6 {
                            v += c[e] * xcross[e][j];
                        }
                        cpart[j][k] = v * nu;
                    }
                    if chi != 0.0 {
                        let mut curl = zero;
                        for e in 0..6 {
                            curl += c[e] * curls[e][j];
                        }
                        let delta = if j == k { geo.volume } else { 0.0 };
                        npart[j][k] = (curl * (0.5 * geo.volume) + delta) * chi;
                    }
                }
            }
            (cpart, npart)
        })
        .collect();
    let mut csum = [[zero; 3]; 3];
    let mut nsum = [[zero; 3]; 3];
    for (cp, np) in &parts {
        for j in 0..3 {
            for k in 0..3 {
                csum[j][k] += cp[j][k];
                nsum[j][k] += np[j][k];
            }
        }
    }
    let a3 = alpha.powi(3);
    let cpref = Complex64::new(0.0, -a3 / 4.0);
    let mut c = [[zero; 3]; 3];
    let mut n = [[zero; 3]; 3];
    let mut m = [[zero; 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            c[j][k] = cpref * csum[j][k];
            n[j][k] = nsum[j][k] * a3;
            m[j][k] = n[j][k] - c[j][k];
        }
    }
    let m = ComplexTensor2::from_entries(m);
    let asymmetry_norm = m.asymmetry_norm;
    Ok(MptRecord {
        frequency_hz: omega / (2.0 * std::f64::consts::PI),
        omega,
        alpha,
        m,
        c: ComplexTensor2::from_entries(c),
        n: ComplexTensor2::from_entries(n),
        n0: ComplexTensor2::zero(),
        nu: problem.nu[1..].to_vec(),
        asymmetry_norm,
    })
}

/// ℳ' = R ℳ Rᵀ.
pub fn transform_mpt(m: &ComplexTensor2, r: &Mat3) -> Result<ComplexTensor2> {
    check_orthogonal(r, 1e-10)?;
    m.rotated(r)
}

/// Mesh + materials + size, with the 𝒩⁰ solve cached across frequencies.
pub struct MptSolver {
    space: FemSpace,
    materials: Vec<Material>,
    alpha: f64,
    options: SolverOptions,
    eps_reg: Option<f64>,
    n0: OnceLock<MptRecord>,
}

impl MptSolver {
    pub fn new(mesh: Arc<TetMesh>, materials: Vec<Material>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(MptError::InvalidArgument(format!("alpha must be > 0, got {alpha}")));
        }
        if materials.len() < mesh.max_tag() as usize {
            return Err(MptError::InvalidArgument(format!(
                "mesh has {} object regions but {} materials were given",
                mesh.max_tag(),
                materials.len()
            )));
        }
        for m in &materials {
            m.validate()?;
        }
        if !mesh.tags.contains(&0) {
            return Err(MptError::Mesh("mesh has no free-space region (tag 0)".into()));
        }
        Ok(Self { space: FemSpace::new(mesh), materials, alpha, options: SolverOptions::default(), eps_reg: None, n0: OnceLock::new() })
    }

    pub fn with_options(mut self, options: SolverOptions) -> Self {
        self.options = options;
        self
    }

    /// Fixed regularization instead of the ν-dependent default.
    pub fn with_eps_reg(mut self, eps: f64) -> Self {
        self.eps_reg = Some(eps);
        self
    }

    pub fn mesh(&self) -> &TetMesh {
        &self.space.mesh
    }

    pub fn space(&self) -> &FemSpace {
        &self.space
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn problem_for_nu(&self, nu_regions: &[f64]) -> Result<TransmissionProblem> {
        let mut nu = vec![0.0];
        nu.extend_from_slice(nu_regions);
        let mut mu_r = vec![1.0];
        mu_r.extend(self.materials.iter().map(|m| m.mu_r));
        TransmissionProblem::from_parts(&self.space.mesh, mu_r, nu, self.eps_reg)
    }

    /// MPT for explicit per-region ν (ω is only recorded).
    pub fn at_nu(&self, nu_regions: &[f64], omega: f64) -> Result<(MptRecord, SolverDiagnostics)> {
        let problem = self.problem_for_nu(nu_regions)?;
        let (sol, diag) = solve_problem(&self.space, &problem, &self.options)?;
        let rec = compute_mpt(&sol, &self.space.mesh, &problem, self.alpha, omega)?;
        Ok((rec, diag))
    }

    /// The ω = 0 record (𝒩⁰ = its 𝒩), solved once.
    pub fn static_record(&self) -> Result<&MptRecord> {
        if let Some(r) = self.n0.get() {
            return Ok(r);
        }
        let zeros = vec![0.0; self.materials.len()];
        let (mut rec, _) = self.at_nu(&zeros, 0.0)?;
        rec.n0 = ComplexTensor2::from_real(rec.n.re());
        Ok(self.n0.get_or_init(|| rec))
    }

    pub fn n0(&self) -> Result<ComplexTensor2> {
        Ok(self.static_record()?.n0)
    }

    pub fn nu_at(&self, frequency_hz: f64) -> Result<Vec<f64>> {
        let omega = omega_of(frequency_hz);
        self.materials.iter().map(|m| compute_nu(m, self.alpha, omega).map(|n| n.value)).collect()
    }

    pub fn at_frequency(&self, frequency_hz: f64) -> Result<(MptRecord, SolverDiagnostics)> {
        if !(frequency_hz >= 0.0 && frequency_hz.is_finite()) {
            return Err(MptError::InvalidArgument(format!("frequency must be >= 0, got {frequency_hz}")));
        }
        let n0 = self.n0()?;
        let nu = self.nu_at(frequency_hz)?;
        let (mut rec, diag) = self
            .at_nu(&nu, omega_of(frequency_hz))
            .map_err(|e| MptError::AtFrequency { frequency_hz, source: Box::new(e) })?;
        rec.frequency_hz = frequency_hz;
        rec.n0 = n0;
        Ok((rec, diag))
    }

    /// Records at every frequency, reusing one 𝒩⁰ solve.
    pub fn sweep(&self, frequencies_hz: &[f64]) -> Result<Vec<MptRecord>> {
        self.n0()?;
        frequencies_hz.par_iter().map(|&f| self.at_frequency(f).map(|r| r.0)).collect()
    }

    pub fn sweep_spectra(&self, frequencies_hz: &[f64]) -> Result<(SpectralSignature, Vec<MptRecord>)> {
        if frequencies_hz.len() < 2 || frequencies_hz.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MptError::InvalidArgument("frequencies must be ascending with at least two entries".into()));
        }
        let records = self.sweep(frequencies_hz)?;
        Ok((SpectralSignature::from_records(&records), records))
    }
}

/// 𝒩⁰ of `mesh` with `materials` at size `alpha`.
pub fn compute_n0(mesh: Arc<TetMesh>, materials: &[Material], alpha: f64) -> Result<ComplexTensor2> {
    MptSolver::new(mesh, materials.to_vec(), alpha)?.n0()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_box_scene, BoxMeshOptions, BoxRegion};

    fn cube_solver(material: Material) -> MptSolver {
        let b = BoxRegion { min: [-0.5; 3], max: [0.5; 3], tag: 1 };
        let mesh = generate_box_scene(&[b], &BoxMeshOptions { truncation_factor: 10.0, h: 0.5, growth: 2.0 }).unwrap();
        MptSolver::new(Arc::new(mesh), vec![material], 0.01).unwrap()
    }

    #[test]
    fn no_contrast_gives_zero_tensor() {
        let s = cube_solver(Material::free_space());
        let (rec, _) = s.at_frequency(1e3).unwrap();
        assert_eq!(rec.m.norm(), 0.0);
        assert_eq!(s.n0().unwrap().norm(), 0.0);
    }

    #[test]
    fn m_is_minus_c_plus_n() {
        let s = cube_solver(Material::new(1e6, 2.0).unwrap());
        let (rec, _) = s.at_frequency(1e4).unwrap();
        let d = rec.n.sub(&rec.c).sub(&rec.m).norm();
        assert!(d <= 1e-12 * rec.m.norm(), "{d}");
    }
}

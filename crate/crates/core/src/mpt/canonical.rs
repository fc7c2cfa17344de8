//! Canonical form: centre the object at its volume centroid and choose α so the
//! normalizing tensor has unit |det|.
//!
//! The normalizing tensor is 𝒩⁰ when some region is permeable. When every
//! region has μ_r = 1 (𝒩⁰ = 0), or 𝒩⁰ is rank deficient, the real part of ℳ in
//! the high-conductivity limit is used instead, evaluated with ν = ν_∞ in
//! every conducting region. Both tensors scale as α³, so
//! α = |det T(α = 1)|^{-1/9}.

use std::sync::Arc;

use serde::Serialize;

use super::MptSolver;
use crate::error::{MptError, Result};
use crate::fem::SolverOptions;
use crate::mesh::TetMesh;
use crate::model::Material;
use crate::tensor::{det3, norm3, scale3, sym_eigenvalues, ComplexTensor2, Mat3, Vec3};

/// ν used for the high-conductivity limit.
pub const NU_INFINITY: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Normalization {
    StaticTensor,
    HighConductivity,
}

#[derive(Clone, Copy, Debug)]
pub struct CanonicalOptions {
    pub solver: SolverOptions,
    pub nu_infinity: f64,
    /// 𝒩⁰ counts as rank deficient when min|λ| < rank_tol · max|λ|.
    pub rank_tol: f64,
}

impl Default for CanonicalOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), nu_infinity: NU_INFINITY, rank_tol: 1e-6 }
    }
}

#[derive(Clone, Debug)]
pub struct CanonicalForm {
    /// Input mesh translated so the object centroid is the origin.
    pub mesh: Arc<TetMesh>,
    /// Centroid removed from the input coordinates.
    pub centre: Vec3,
    /// Size such that |det T[α B]| = 1 for the centred shape B.
    pub alpha: f64,
    pub normalization: Normalization,
    /// Set when 𝒩⁰ was rank deficient despite a permeable region.
    pub fallback: bool,
    /// Normalizing tensor of the centred shape at α = 1.
    pub unit_tensor: ComplexTensor2,
}

fn scale_matrix(s: f64) -> Mat3 {
    [[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, s]]
}

/// Puts `mesh` with `materials` in canonical form. The FEM solves run on a
/// copy rescaled to unit circumradius, which makes the result independent of
/// the input length scale.
pub fn canonicalize(mesh: &TetMesh, materials: &[Material], opts: &CanonicalOptions) -> Result<CanonicalForm> {
    let centre = mesh.object_centroid();
    let centred = mesh.translated(&scale3(&centre, -1.0))?;
    let radius = (0..centred.n_tets())
        .filter(|&t| centred.tags[t] != 0)
        .flat_map(|t| centred.tets[t])
        .map(|n| norm3(&centred.nodes[n]))
        .fold(0.0, f64::max);
    let unit = centred.transformed(&scale_matrix(1.0 / radius), &[0.0; 3])?;
    let solver = MptSolver::new(Arc::new(unit), materials.to_vec(), 1.0)?.with_options(opts.solver);

    let permeable = materials.iter().any(|m| m.mu_r != 1.0);
    let mut fallback = false;
    let mut chosen = None;
    if permeable {
        let n0 = solver.n0()?;
        let ev = sym_eigenvalues(&n0.re());
        let max = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let min = ev.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        if max > 0.0 && min >= opts.rank_tol * max {
            chosen = Some((n0, Normalization::StaticTensor));
        } else {
            fallback = true;
        }
    }
    let (tensor, normalization) = match chosen {
        Some(c) => c,
        None => {
            if materials.iter().all(|m| m.sigma == 0.0) {
                return Err(MptError::InvalidArgument(
                    "cannot normalize: no permeable contrast and no conducting region".into(),
                ));
            }
            let nu: Vec<f64> = materials.iter().map(|m| if m.sigma > 0.0 { opts.nu_infinity } else { 0.0 }).collect();
            let (rec, _) = solver.at_nu(&nu, 0.0)?;
            (ComplexTensor2::from_real(rec.m.re()), Normalization::HighConductivity)
        }
    };
    let det = det3(&tensor.re()).abs();
    if !(det > 0.0 && det.is_finite()) {
        return Err(MptError::InvalidArgument("normalizing tensor is singular".into()));
    }
    // α for the unit-circumradius copy, then mapped back to the centred input scale.
    let alpha_unit = det.powf(-1.0 / 9.0);
    let alpha = alpha_unit / radius;
    Ok(CanonicalForm {
        mesh: Arc::new(centred),
        centre,
        alpha,
        normalization,
        fallback,
        unit_tensor: tensor.scale(radius.powi(-3)),
    })
}

//! Leading-order field perturbation from small objects:
//!
//! ```text
//!   (H_α − H₀)(x) = Σ_n D²G(x, z_n) ℳ_n H₀(z_n),   D²G = (3 r̂⊗r̂ − I)/(4π r³)
//! ```
//!
//! The O(α⁴) remainder is not estimated.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tensor::{norm3, sub3, ComplexTensor2, Mat3, Vec3};

/// Hessian of the free-space Laplace Green's function, a function of x − z.
pub fn d2g(x: &Vec3, z: &Vec3) -> Result<Mat3> {
    let r = sub3(x, z);
    let d = norm3(&r);
    if !(d > 0.0) {
        return Err(invalid("d2g is singular at x = z"));
    }
    let u = [r[0] / d, r[1] / d, r[2] / d];
    let c = 1.0 / (4.0 * std::f64::consts::PI * d * d * d);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = c * (3.0 * u[i] * u[j] - if i == j { 1.0 } else { 0.0 });
        }
    }
    Ok(out)
}

fn real_mat_cvec(m: &Mat3, v: &[Complex64; 3]) -> [Complex64; 3] {
    std::array::from_fn(|i| v[0] * m[i][0] + v[1] * m[i][1] + v[2] * m[i][2])
}

/// A coil modelled as a point dipole with moment p at s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleSource {
    pub position: Vec3,
    pub moment: Vec3,
}

impl DipoleSource {
    pub fn new(position: Vec3, moment: Vec3) -> Result<Self> {
        if !(norm3(&moment) > 0.0) || position.iter().chain(&moment).any(|v| !v.is_finite()) {
            return Err(invalid("dipole source needs a finite position and non-zero moment"));
        }
        Ok(Self { position, moment })
    }
}

/// Background field H₀.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackgroundField {
    Uniform { h: Vec3 },
    Dipole { source: DipoleSource },
}

impl BackgroundField {
    pub fn at(&self, z: &Vec3) -> Result<Vec3> {
        match self {
            Self::Uniform { h } => Ok(*h),
            Self::Dipole { source } => {
                let g = d2g(z, &source.position)?;
                Ok(crate::tensor::mat_vec(&g, &source.moment))
            }
        }
    }
}

/// H₀(z) = D²G(z, s) p.
pub fn dipole_h0(source: DipoleSource) -> BackgroundField {
    BackgroundField::Dipole { source }
}

/// Position, size and MPT of one object (or one closely spaced entity).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectResponse {
    pub z: Vec3,
    pub alpha: f64,
    pub mpt: ComplexTensor2,
}

/// H_α − H₀ at `x` to leading order. Probes within distance α of an object
/// centre are rejected as inside.
pub fn perturbed_field(objects: &[ObjectResponse], h0: &BackgroundField, x: &Vec3) -> Result<[Complex64; 3]> {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for o in objects {
        if norm3(&sub3(x, &o.z)) <= o.alpha {
            return Err(invalid(format!("probe {x:?} lies inside the object at {:?}", o.z)));
        }
        let h = h0.at(&o.z)?;
        let mh = o.mpt.apply(h.map(|v| Complex64::new(v, 0.0)));
        let f = real_mat_cvec(&d2g(x, &o.z)?, &mh);
        for i in 0..3 {
            out[i] += f[i];
        }
    }
    Ok(out)
}

/// `perturbed_field` over many probes, in probe order.
pub fn field_sweep(objects: &[ObjectResponse], h0: &BackgroundField, probes: &[Vec3]) -> Result<Vec<[Complex64; 3]>> {
    probes.par_iter().map(|x| perturbed_field(objects, h0, x)).collect()
}

/// CSV `x1,x2,x3,Hre1,Him1,Hre2,Him2,Hre3,Him3` with an optional `#` comment line.
pub fn field_csv(probes: &[Vec3], values: &[[Complex64; 3]], comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("x1,x2,x3,Hre1,Him1,Hre2,Him2,Hre3,Him3\n");
    for (x, h) in probes.iter().zip(values) {
        let _ = writeln!(out, "{},{},{},{},{},{},{},{},{}", x[0], x[1], x[2], h[0].re, h[0].im, h[1].re, h[1].im, h[2].re, h[2].im);
    }
    out
}

//! MUSIC imaging functional
//!
//! ```text
//!   I(z) = [Σ_{i=1..3} ‖P g_i(z)‖²]^{-1/2},   g_i(z)_l = e_i · D²G(z, s_l) p_l
//! ```
//!
//! with P = I − V_S V_Sᴴ and V_S the leading 3·n right singular vectors of A.
//! The steering vectors live on the source side, hence right vectors.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CoilArray, MsrMatrix};
use crate::error::{invalid, MptError, Result};
use crate::forward::d2g;
use crate::tensor::{mat_vec, Vec3};

/// Regular grid of trial points in a plane of constant x₃, x varying fastest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneGrid {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub z: f64,
    pub spacing: f64,
}

impl PlaneGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) || !(self.x_range[1] >= self.x_range[0]) || !(self.y_range[1] >= self.y_range[0]) {
            return Err(invalid("grid needs spacing > 0 and ordered ranges"));
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        let n = |r: [f64; 2]| ((r[1] - r[0]) / self.spacing + 1e-9).floor() as usize + 1;
        (n(self.x_range), n(self.y_range))
    }

    pub fn point(&self, i: usize, j: usize) -> Vec3 {
        [self.x_range[0] + i as f64 * self.spacing, self.y_range[0] + j as f64 * self.spacing, self.z]
    }

    pub fn points(&self) -> Vec<Vec3> {
        let (nx, ny) = self.dims();
        (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| self.point(i, j)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct MusicImage {
    pub grid: PlaneGrid,
    /// I_MU per grid point, x fastest.
    pub values: Vec<f64>,
    /// ‖G‖_F/‖P G‖_F per grid point with G = [g₁ g₂ g₃]: 1 when the steering
    /// vectors are orthogonal to the signal subspace, large when they lie in it.
    pub alignment: Vec<f64>,
    /// Grid points coinciding with a source; their value is 0.
    pub skipped: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub z: Vec3,
    pub value: f64,
}

fn signal_basis(a: &MsrMatrix, n_signal: usize) -> Result<Mat<Complex64>> {
    let (k, l) = (a.a.nrows(), a.a.ncols());
    if n_signal == 0 || n_signal >= k.min(l) {
        return Err(invalid(format!("signal subspace dimension {n_signal} must be in 1..{}", k.min(l))));
    }
    let svd = a.a.thin_svd().map_err(|e| MptError::Solver(format!("SVD failed: {e:?}")))?;
    Ok(svd.V().subcols(0, n_signal).to_owned())
}

/// P = I_L − V_S V_Sᴴ for the leading `n_signal` right singular vectors.
pub fn noise_projector(a: &MsrMatrix, n_signal: usize) -> Result<Mat<Complex64>> {
    let vs = signal_basis(a, n_signal)?;
    let l = vs.nrows();
    let mut p = Mat::<Complex64>::identity(l, l);
    p -= &vs * vs.adjoint();
    Ok(p)
}

pub fn music_image(a: &MsrMatrix, coils: &CoilArray, grid: &PlaneGrid, n_objects: usize) -> Result<MusicImage> {
    grid.validate()?;
    if a.a.ncols() != coils.l() || a.a.nrows() != coils.k() {
        return Err(invalid("MSR matrix does not match the coil array"));
    }
    if n_objects == 0 || 3 * n_objects >= coils.k().min(coils.l()) {
        return Err(invalid(format!("n_objects = {n_objects} exceeds what {} x {} coils can resolve", coils.k(), coils.l())));
    }
    let vs = signal_basis(a, 3 * n_objects)?;
    let r = vs.ncols();
    let evaluated: Vec<Option<(f64, f64)>> = grid
        .points()
        .par_iter()
        .map(|z| {
            let mut steer = Vec::with_capacity(coils.l());
            for s in &coils.sources {
                steer.push(mat_vec(&d2g(z, &s.position).ok()?, &s.moment));
            }
            let mut total = 0.0;
            let mut full = 0.0;
            for i in 0..3 {
                full += steer.iter().map(|g| g[i] * g[i]).sum::<f64>();
                // c = V_Sᴴ g, then ‖g − V_S c‖².
                let coef: Vec<Complex64> =
                    (0..r).map(|m| steer.iter().enumerate().map(|(l, g)| vs[(l, m)].conj() * g[i]).sum()).collect();
                for (l, g) in steer.iter().enumerate() {
                    let mut res = Complex64::new(g[i], 0.0);
                    for (m, c) in coef.iter().enumerate() {
                        res -= vs[(l, m)] * c;
                    }
                    total += res.norm_sqr();
                }
            }
            Some((1.0 / total.sqrt(), (full / total).sqrt()))
        })
        .collect();
    let skipped = evaluated.iter().enumerate().filter(|(_, v)| v.is_none()).map(|(i, _)| i).collect();
    Ok(MusicImage {
        grid: *grid,
        values: evaluated.iter().map(|v| v.map_or(0.0, |v| v.0)).collect(),
        alignment: evaluated.iter().map(|v| v.map_or(0.0, |v| v.1)).collect(),
        skipped,
    })
}

/// Largest fraction ‖P G‖_F/‖G‖_F of steering energy outside the signal
/// subspace for a local maximum of I_MU to count as an object.
pub const MAX_RESIDUAL_FRACTION: f64 = 0.15;

/// Local maxima of I_MU over the 8 neighbours whose steering vectors leave at
/// most `max_residual_fraction` of their norm outside the signal subspace,
/// strongest first. Grid-edge maxima of the smooth background fail the
/// alignment test, as do points where only part of an object's response
/// rises above the noise.
pub fn find_peaks(image: &MusicImage, max_residual_fraction: f64) -> Vec<Peak> {
    let (nx, ny) = image.grid.dims();
    let v = &image.values;
    let mut peaks = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let c = v[j * nx + i];
            if c <= 0.0 || image.alignment[j * nx + i] * max_residual_fraction < 1.0 {
                continue;
            }
            let mut is_max = true;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                        continue;
                    }
                    if v[jj as usize * nx + ii as usize] > c {
                        is_max = false;
                    }
                }
            }
            if is_max {
                peaks.push(Peak { z: image.grid.point(i, j), value: c });
            }
        }
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value));
    peaks
}

/// CSV `x1,x2,x3,I_MU` with an optional `#` comment line.
pub fn music_csv(image: &MusicImage, comment: Option<&str>) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    if let Some(c) = comment {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("x1,x2,x3,I_MU\n");
    for (z, v) in image.grid.points().iter().zip(&image.values) {
        let _ = writeln!(out, "{},{},{},{}", z[0], z[1], z[2], v);
    }
    out
}

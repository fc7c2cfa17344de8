//! Least-squares recovery of symmetric MPTs from MSR data at known positions.
//!
//! Each entry A_kl is linear in the six independent components of every ℳ_n,
//! with real coefficients built from u = D²G(r_k, z_n) q_k and
//! v = D²G(z_n, s_l) p_l. Real and imaginary parts share the design matrix.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use super::{CoilArray, MsrMatrix};
use crate::error::{invalid, MptError, Result};
use crate::tensor::{ComplexTensor2, Vec3};

const VOIGT_NAMES: [&str; 6] = ["xx", "yy", "zz", "xy", "xz", "yz"];
const VOIGT_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Below this ratio of smallest to largest singular value of the
/// column-scaled design the problem counts as rank deficient.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct Recovery {
    /// `tensors[n][j]`: object n at the j-th input frequency.
    pub tensors: Vec<Vec<ComplexTensor2>>,
    /// ‖A − L(𝔐)‖_F / ‖A‖_F per frequency.
    pub residuals: Vec<f64>,
    /// 2-norm condition number of the column-scaled design matrix.
    pub condition: f64,
}

fn design(coils: &CoilArray, positions: &[Vec3]) -> Result<Mat<f64>> {
    let (k, l) = (coils.k(), coils.l());
    let mut d = Mat::<f64>::zeros(k * l, 6 * positions.len());
    for (n, z) in positions.iter().enumerate() {
        let u = coils.receiver_vectors(z)?;
        let v = coils.source_vectors(z)?;
        for ll in 0..l {
            for kk in 0..k {
                let row = ll * k + kk;
                for (c, &(a, b)) in VOIGT_PAIRS.iter().enumerate() {
                    let val = if a == b { u[kk][a] * v[ll][a] } else { u[kk][a] * v[ll][b] + u[kk][b] * v[ll][a] };
                    d[(row, 6 * n + c)] = val;
                }
            }
        }
    }
    Ok(d)
}

pub fn recover_mpts(msrs: &[MsrMatrix], positions: &[Vec3], coils: &CoilArray) -> Result<Recovery> {
    if msrs.is_empty() || positions.is_empty() {
        return Err(invalid("recovery needs at least one MSR matrix and one position"));
    }
    let (k, l) = (coils.k(), coils.l());
    if msrs.iter().any(|m| m.a.nrows() != k || m.a.ncols() != l) {
        return Err(invalid("MSR matrix does not match the coil array"));
    }
    let mut d = design(coils, positions)?;
    let cols = d.ncols();
    if k * l < cols {
        return Err(MptError::RankDeficient(format!("{} measurements for {cols} unknowns", k * l)));
    }
    let scale: Vec<f64> = (0..cols).map(|c| d.col(c).norm_l2()).collect();
    for c in 0..cols {
        if scale[c] == 0.0 {
            return Err(MptError::RankDeficient(format!("object {} component {} is unobservable", c / 6, VOIGT_NAMES[c % 6])));
        }
        let s = scale[c];
        d.col_mut(c).iter_mut().for_each(|x| *x /= s);
    }
    let svd = d.thin_svd().map_err(|e| MptError::Solver(format!("SVD failed: {e:?}")))?;
    let sv: Vec<f64> = (0..cols).map(|i| svd.S()[i]).collect();
    let condition = sv[0] / sv[cols - 1];
    if !(sv[cols - 1] > RANK_TOL * sv[0]) {
        let mut dirs = Vec::new();
        for i in (0..cols).filter(|&i| !(sv[i] > RANK_TOL * sv[0])) {
            let v = svd.V().col(i);
            let terms: Vec<String> = (0..cols)
                .filter(|&c| v[c].abs() > 0.1)
                .map(|c| format!("{:+.3}·M{}[{}]", v[c], c / 6, VOIGT_NAMES[c % 6]))
                .collect();
            dirs.push(terms.join(" "));
        }
        return Err(MptError::RankDeficient(format!("unobservable directions: {}", dirs.join("; "))));
    }
    let qr = d.qr();
    let mut tensors = vec![Vec::with_capacity(msrs.len()); positions.len()];
    let mut residuals = Vec::with_capacity(msrs.len());
    for m in msrs {
        let rhs = Mat::<f64>::from_fn(k * l, 2, |row, part| {
            let v = m.a[(row % k, row / k)];
            if part == 0 { v.re } else { v.im }
        });
        let x = qr.solve_lstsq(&rhs);
        let fit = &d * &x;
        let mut res = 0.0;
        let mut total = 0.0;
        for row in 0..k * l {
            let v = m.a[(row % k, row / k)];
            res += (v - Complex64::new(fit[(row, 0)], fit[(row, 1)])).norm_sqr();
            total += v.norm_sqr();
        }
        residuals.push(if total > 0.0 { (res / total).sqrt() } else { 0.0 });
        for (n, out) in tensors.iter_mut().enumerate() {
            let voigt = std::array::from_fn(|c| Complex64::new(x[(6 * n + c, 0)], x[(6 * n + c, 1)]) / scale[6 * n + c]);
            out.push(ComplexTensor2::from_voigt(voigt));
        }
    }
    Ok(Recovery { tensors, residuals, condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{DipoleSource, ObjectResponse};
    use crate::inverse::build_msr;
    use crate::tensor::Mat3;

    fn tensor() -> ComplexTensor2 {
        let re: Mat3 = [[-2.0, 0.3, 0.1], [0.3, -1.0, -0.2], [0.1, -0.2, -1.5]];
        let im: Mat3 = [[1.0, -0.1, 0.0], [-0.1, 0.7, 0.05], [0.0, 0.05, 0.4]];
        ComplexTensor2::from_parts(re, im).scale(1e-6)
    }

    #[test]
    fn noiseless_round_trip() {
        let coils = CoilArray::planar_grid(16, 1.0, 0.0, [0.0, 0.0, 1.0]).unwrap();
        let objs = [
            ObjectResponse { z: [0.1, 0.1, -0.5], alpha: 0.01, mpt: tensor() },
            ObjectResponse { z: [-0.3, 0.3, -0.5], alpha: 0.01, mpt: tensor().scale(0.5) },
        ];
        let a = build_msr(&objs, &coils, 1e3).unwrap();
        let rec = recover_mpts(&[a], &[objs[0].z, objs[1].z], &coils).unwrap();
        for (n, o) in objs.iter().enumerate() {
            let err = rec.tensors[n][0].sub(&o.mpt).norm() / o.mpt.norm();
            assert!(err < 1e-8, "{err}");
        }
        assert!(rec.residuals[0] < 1e-8);
    }

    #[test]
    fn single_coil_is_rank_deficient() {
        let c = DipoleSource::new([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let coils = CoilArray::new(vec![c], vec![c]).unwrap();
        let o = ObjectResponse { z: [0.0, 0.0, -0.5], alpha: 0.01, mpt: tensor() };
        let a = build_msr(&[o.clone()], &coils, 1.0).unwrap();
        assert!(matches!(recover_mpts(&[a], &[o.z], &coils), Err(MptError::RankDeficient(_))));
    }
}

//! Rank-2 complex symmetric tensors and small dense helpers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY3: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// 3×3 complex tensor kept in symmetrized form.
///
/// Construction from an arbitrary array stores `(A + Aᵀ)/2` and records
/// `‖(A − Aᵀ)/2‖_F` as the asymmetry norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexTensor2 {
    pub entries: [[Complex64; 3]; 3],
    pub asymmetry_norm: f64,
}

impl Default for ComplexTensor2 {
    fn default() -> Self {
        Self::zero()
    }
}

impl ComplexTensor2 {
    pub fn zero() -> Self {
        Self { entries: [[Complex64::new(0.0, 0.0); 3]; 3], asymmetry_norm: 0.0 }
    }

    pub fn from_entries(a: [[Complex64; 3]; 3]) -> Self {
        let mut s = [[Complex64::new(0.0, 0.0); 3]; 3];
        let mut asym = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                s[j][k] = (a[j][k] + a[k][j]) * 0.5;
                asym += ((a[j][k] - a[k][j]) * 0.5).norm_sqr();
            }
        }
        Self { entries: s, asymmetry_norm: asym.sqrt() }
    }

    pub fn from_real(a: Mat3) -> Self {
        Self::from_parts(a, [[0.0; 3]; 3])
    }

    pub fn from_parts(re: Mat3, im: Mat3) -> Self {
        let mut e = [[Complex64::new(0.0, 0.0); 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                e[j][k] = Complex64::new(re[j][k], im[j][k]);
            }
        }
        Self::from_entries(e)
    }

    pub fn isotropic(m: Complex64) -> Self {
        let mut e = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (j, row) in e.iter_mut().enumerate() {
            row[j] = m;
        }
        Self { entries: e, asymmetry_norm: 0.0 }
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j][k]
    }

    pub fn re(&self) -> Mat3 {
        self.map_real(|z| z.re)
    }

    pub fn im(&self) -> Mat3 {
        self.map_real(|z| z.im)
    }

    fn map_real(&self, f: impl Fn(Complex64) -> f64) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                out[j][k] = f(self.entries[j][k]);
            }
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Symmetric within `tol` relative to the tensor norm (absolute when the norm is 0).
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry_norm <= tol * self.norm().max(f64::MIN_POSITIVE)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.zip(self, |a, _| a * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let mut e = self.entries;
        for j in 0..3 {
            for k in 0..3 {
                e[j][k] = f(self.entries[j][k], other.entries[j][k]);
            }
        }
        Self { entries: e, asymmetry_norm: 0.0 }
    }

    /// `R·A·Rᵀ` for orthogonal `R`.
    pub fn rotated(&self, r: &Mat3) -> Result<Self> {
        check_orthogonal(r, 1e-10)?;
        let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for p in 0..3 {
                    for q in 0..3 {
                        acc += self.entries[p][q] * (r[i][p] * r[j][q]);
                    }
                }
                out[i][j] = acc;
            }
        }
        Ok(Self::from_entries(out))
    }

    pub fn apply(&self, v: [Complex64; 3]) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for j in 0..3 {
            for k in 0..3 {
                out[j] += self.entries[j][k] * v[k];
            }
        }
        out
    }

    /// The six independent entries in the order xx, yy, zz, xy, xz, yz.
    pub fn to_voigt(&self) -> [Complex64; 6] {
        let e = &self.entries;
        [e[0][0], e[1][1], e[2][2], e[0][1], e[0][2], e[1][2]]
    }

    pub fn from_voigt(v: [Complex64; 6]) -> Self {
        let e = [[v[0], v[3], v[4]], [v[3], v[1], v[5]], [v[4], v[5], v[2]]];
        Self { entries: e, asymmetry_norm: 0.0 }
    }
}

pub fn check_orthogonal(r: &Mat3, tol: f64) -> Result<()> {
    for i in 0..3 {
        for j in 0..3 {
            let d: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if !d.is_finite() || (d - target).abs() > tol {
                return Err(invalid(format!("matrix is not orthogonal (RᵀR[{i}][{j}] = {d})")));
            }
        }
    }
    Ok(())
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn det3(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub fn sub3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale3(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a real symmetric 3×3 matrix.
pub fn sym_eigen(a: &Mat3) -> ([f64; 3], Mat3) {
    let m = faer::Mat::<f64>::from_fn(3, 3, |i, j| 0.5 * (a[i][j] + a[j][i]));
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("3x3 symmetric eigendecomposition cannot fail for finite input");
    let s = evd.S();
    let u = evd.U();
    let mut vals = [0.0; 3];
    let mut vecs = [[0.0; 3]; 3];
    for k in 0..3 {
        vals[k] = s[k];
        for i in 0..3 {
            vecs[i][k] = u[(i, k)];
        }
    }
    (vals, vecs)
}

pub fn sym_eigenvalues(a: &Mat3) -> [f64; 3] {
    sym_eigen(a).0
}

/// Rotation by `angle` about the unit `axis` (Rodrigues).
pub fn rotation_about(axis: Vec3, angle: f64) -> Mat3 {
    let n = norm3(&axis);
    let [x, y, z] = scale3(&axis, 1.0 / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ]
}

/// Uniformly distributed rotation from a unit quaternion built on three uniform samples.
pub fn random_rotation(u1: f64, u2: f64, u3: f64) -> Mat3 {
    use std::f64::consts::TAU;
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let (w, x, y, z) = (a * (TAU * u2).sin(), a * (TAU * u2).cos(), b * (TAU * u3).sin(), b * (TAU * u3).cos());
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symmetrization_records_asymmetry() {
        let mut a = [[c(0.0, 0.0); 3]; 3];
        a[0][1] = c(1.0, 0.0);
        let t = ComplexTensor2::from_entries(a);
        assert_eq!(t.get(0, 1), c(0.5, 0.0));
        assert_eq!(t.get(1, 0), c(0.5, 0.0));
        assert!((t.asymmetry_norm - (0.5f64).sqrt()).abs() < 1e-15);
        let s = ComplexTensor2::isotropic(c(2.0, 1.0));
        assert_eq!(ComplexTensor2::from_entries(s.entries).asymmetry_norm, 0.0);
    }

    #[test]
    fn quarter_turn_permutes_diagonal() {
        let t = ComplexTensor2::from_parts([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]], [[0.0; 3]; 3]);
        let r = rotation_about([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2);
        let out = t.rotated(&r).unwrap();
        assert!((out.get(0, 0).re - 2.0).abs() < 1e-14);
        assert!((out.get(1, 1).re - 1.0).abs() < 1e-14);
        assert!((out.get(2, 2).re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_orthogonal() {
        let t = ComplexTensor2::zero();
        assert!(t.rotated(&[[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn eigen_of_diagonal() {
        let (v, _) = sym_eigen(&[[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert_eq!(v, [-1.0, 2.0, 3.0]);
    }

    #[test]
    fn voigt_round_trip() {
        let v = [c(1.0, 0.1), c(2.0, 0.2), c(3.0, 0.3), c(4.0, 0.4), c(5.0, 0.5), c(6.0, 0.6)];
        assert_eq!(ComplexTensor2::from_voigt(v).to_voigt(), v);
    }
}

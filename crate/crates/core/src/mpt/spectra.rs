//! Eigenvalue spectra of ℛ = Re(ℳ − 𝒩⁰) and ℐ = Im(ℳ) and their features.

use serde::{Deserialize, Serialize};

use super::MptRecord;
use crate::error::{invalid, Result};
use crate::tensor::{sym_eigenvalues, ComplexTensor2};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSignature {
    pub frequencies: Vec<f64>,
    /// Ascending eigenvalues of ℛ per frequency.
    pub lambda_r: Vec<[f64; 3]>,
    /// Ascending eigenvalues of ℐ per frequency.
    pub lambda_i: Vec<[f64; 3]>,
    /// max |λ| over the sweep.
    pub normalization: f64,
}

pub fn spectra_of(m: &ComplexTensor2, n0: &ComplexTensor2) -> ([f64; 3], [f64; 3]) {
    let mut r = m.re();
    let n0r = n0.re();
    for j in 0..3 {
        for k in 0..3 {
            r[j][k] -= n0r[j][k];
        }
    }
    (sym_eigenvalues(&r), sym_eigenvalues(&m.im()))
}

impl SpectralSignature {
    pub fn from_records(records: &[MptRecord]) -> Self {
        let mut lambda_r = Vec::with_capacity(records.len());
        let mut lambda_i = Vec::with_capacity(records.len());
        for r in records {
            let (lr, li) = spectra_of(&r.m, &r.n0);
            lambda_r.push(lr);
            lambda_i.push(li);
        }
        let normalization = lambda_r.iter().chain(&lambda_i).flatten().map(|v| v.abs()).fold(0.0, f64::max);
        Self { frequencies: records.iter().map(|r| r.frequency_hz).collect(), lambda_r, lambda_i, normalization }
    }

    /// λ_ℛ then λ_ℐ triples, frequency by frequency.
    pub fn features(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(6 * self.frequencies.len());
        for (r, i) in self.lambda_r.iter().zip(&self.lambda_i) {
            out.extend_from_slice(r);
            out.extend_from_slice(i);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeatureCounts {
    /// Non-stationary inflection points of each λ(ℛ) against log f.
    pub inflections: [usize; 3],
    /// Strict interior local maxima of each λ(ℐ).
    pub maxima: [usize; 3],
    /// max over eigenvalues and both feature kinds.
    pub material_bound: usize,
}

/// Noise floor for feature detection: this fraction of max |λ| in a family.
pub const FEATURE_NOISE_FRACTION: f64 = 1e-3;

fn count_maxima(y: &[f64], eta: f64) -> usize {
    // Collapse flat runs so a peak straddling two samples counts once.
    let tol = 1e-12 * y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut z: Vec<f64> = Vec::with_capacity(y.len());
    for &v in y {
        if z.last().is_none_or(|l| (v - l).abs() > tol) {
            z.push(v);
        }
    }
    (1..z.len().saturating_sub(1)).filter(|&i| z[i] > z[i - 1] && z[i] > z[i + 1] && z[i] > eta).count()
}

fn count_inflections(x: &[f64], y: &[f64], eta: f64) -> usize {
    let n = y.len();
    let slope: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let step: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]).abs()).collect();
    // Second differences at interior points whose neighbouring steps are above the floor.
    let curv: Vec<f64> = (1..n - 1)
        .filter(|&i| step[i - 1].max(step[i]) > eta)
        .map(|i| (slope[i] - slope[i - 1]) / (0.5 * (x[i + 1] - x[i - 1])))
        .filter(|c| *c != 0.0)
        .collect();
    curv.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
}

pub fn count_spectral_features(sig: &SpectralSignature) -> Result<FeatureCounts> {
    let n = sig.frequencies.len();
    if n < 5 {
        return Err(invalid(format!("feature counting needs at least 5 frequencies, got {n}")));
    }
    if sig.frequencies.iter().any(|f| !(*f > 0.0)) {
        return Err(invalid("feature counting needs positive frequencies (log scale)"));
    }
    let x: Vec<f64> = sig.frequencies.iter().map(|f| f.log10()).collect();
    let eta_r = FEATURE_NOISE_FRACTION * sig.lambda_r.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let eta_i = FEATURE_NOISE_FRACTION * sig.lambda_i.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let mut inflections = [0; 3];
    let mut maxima = [0; 3];
    for k in 0..3 {
        let yr: Vec<f64> = sig.lambda_r.iter().map(|l| l[k]).collect();
        let yi: Vec<f64> = sig.lambda_i.iter().map(|l| l[k]).collect();
        inflections[k] = count_inflections(&x, &yr, eta_r);
        maxima[k] = count_maxima(&yi, eta_i);
    }
    let material_bound = inflections.iter().chain(&maxima).copied().max().unwrap_or(0);
    Ok(FeatureCounts { inflections, maxima, material_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signature(f: &[f64], r: impl Fn(f64) -> f64, i: impl Fn(f64) -> f64) -> SpectralSignature {
        SpectralSignature {
            frequencies: f.to_vec(),
            lambda_r: f.iter().map(|&x| [r(x); 3]).collect(),
            lambda_i: f.iter().map(|&x| [i(x); 3]).collect(),
            normalization: 1.0,
        }
    }

    fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn sigmoid_has_one_inflection_and_bump_one_maximum() {
        let f = logspace(0.0, 6.0, 40);
        let s = signature(&f, |x| -1.0 / (1.0 + (-(x.log10() - 3.0) * 2.0).exp()), |x| (-(x.log10() - 3.0).powi(2)).exp());
        let c = count_spectral_features(&s).unwrap();
        assert_eq!(c.inflections, [1, 1, 1]);
        assert_eq!(c.maxima, [1, 1, 1]);
    }

    #[test]
    fn two_bumps_two_maxima() {
        let f = logspace(0.0, 8.0, 60);
        let s = signature(&f, |_| 0.0, |x| {
            let l = x.log10();
            (-(l - 2.0).powi(2)).exp() + (-(l - 6.0).powi(2)).exp()
        });
        assert_eq!(count_spectral_features(&s).unwrap().maxima, [2, 2, 2]);
    }

    #[test]
    fn too_few_frequencies() {
        let f = logspace(0.0, 1.0, 4);
        assert!(count_spectral_features(&signature(&f, |_| 0.0, |_| 0.0)).is_err());
    }
}

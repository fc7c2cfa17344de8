//! MPT record JSON and spectra CSV.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{MptRecord, SpectralSignature};
use crate::error::{MptError, Result};
use crate::tensor::Mat3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct MptJson {
    pub f_hz: f64,
    pub alpha: f64,
    pub M_re: Mat3,
    pub M_im: Mat3,
    pub N0: Mat3,
    pub nu: Vec<f64>,
    pub asymmetry_norm: f64,
}

impl From<&MptRecord> for MptJson {
    fn from(r: &MptRecord) -> Self {
        Self {
            f_hz: r.frequency_hz,
            alpha: r.alpha,
            M_re: r.m.re(),
            M_im: r.m.im(),
            N0: r.n0.re(),
            nu: r.nu.clone(),
            asymmetry_norm: r.asymmetry_norm,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MptFile<P> {
    provenance: P,
    records: Vec<MptJson>,
}

/// `{"provenance": …, "records": [MptJson, …]}`.
pub fn write_mpt_records<P: Serialize>(path: &std::path::Path, provenance: &P, records: &[MptJson]) -> Result<()> {
    let text = serde_json::to_string_pretty(&MptFile { provenance, records: records.to_vec() })?;
    std::fs::write(path, text + "\n").map_err(|e| MptError::io(path, e))
}

pub fn read_mpt_records(path: &std::path::Path) -> Result<Vec<MptJson>> {
    let text = std::fs::read_to_string(path).map_err(|e| MptError::io(path, e))?;
    let file: MptFile<serde_json::Value> = serde_json::from_str(&text)?;
    Ok(file.records)
}

/// Spectra as CSV (`f_hz,lamR1,lamR2,lamR3,lamI1,lamI2,lamI3`), with an
/// optional leading `#` comment line. Floats use shortest round-trip form.
pub fn spectra_csv(sig: &SpectralSignature, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("f_hz,lamR1,lamR2,lamR3,lamI1,lamI2,lamI3\n");
    for ((f, r), i) in sig.frequencies.iter().zip(&sig.lambda_r).zip(&sig.lambda_i) {
        let _ = writeln!(out, "{f},{},{},{},{},{},{}", r[0], r[1], r[2], i[0], i[1], i[2]);
    }
    out
}

//! Dictionary of normalized eigenvalue spectra and nearest-entry matching.
//!
//! An entry is the concatenation of the λ(ℛ) and λ(ℐ) triples at every
//! frequency, divided by its largest absolute component. Matching builds the
//! same vector from recovered tensors. λ(ℛ) needs the target's 𝒩⁰, which the
//! measurements do not provide, so it is formed per hypothesis: the
//! candidate's 𝒩⁰ is carried into the target frame by pairing the sorted
//! eigenvectors of Re ℳ of target and candidate at each frequency.

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, MptError, Result};
use crate::fem::SolverOptions;
use crate::mesh::TetMesh;
use crate::model::Material;
use crate::mpt::{canonicalize, spectra_of, CanonicalOptions, MptRecord, MptSolver, SpectralSignature};
use crate::tensor::{mat_mul, sym_eigen, transpose, ComplexTensor2, Mat3};

#[derive(Clone, Debug)]
pub struct Candidate {
    pub name: String,
    pub mesh: Arc<TetMesh>,
    pub materials: Vec<Material>,
    /// Physical size at which the spectra are evaluated.
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryEntry {
    pub name: String,
    pub features: Vec<f64>,
    /// Re 𝒩⁰ in the candidate frame, used to form λ(ℛ) of targets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<Mat3>,
    /// Re ℳ per frequency in the candidate frame.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m_re: Vec<Mat3>,
    /// Size that puts the candidate in canonical form (input mesh units).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical_alpha: Option<f64>,
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let max = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if max > 0.0 {
        v.iter_mut().for_each(|x| *x /= max);
    }
    v
}

impl DictionaryEntry {
    pub fn from_records(name: impl Into<String>, records: &[MptRecord]) -> Self {
        let sig = SpectralSignature::from_records(records);
        let n0 = records.first().map(|r| r.n0.re()).filter(|m| m.iter().flatten().any(|v| *v != 0.0));
        Self {
            name: name.into(),
            features: normalized(sig.features()),
            n0,
            m_re: records.iter().map(|r| r.m.re()).collect(),
            canonical_alpha: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dictionary {
    pub frequencies_hz: Vec<f64>,
    pub entries: Vec<DictionaryEntry>,
    /// Written by the CLI; ignored when matching.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl Dictionary {
    pub fn new(frequencies_hz: Vec<f64>, entries: Vec<DictionaryEntry>) -> Result<Self> {
        let d = Self { frequencies_hz, entries, provenance: None };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies_hz.is_empty() {
            return Err(invalid("dictionary needs at least one frequency"));
        }
        let mut names = HashSet::new();
        let len = 6 * self.frequencies_hz.len();
        for e in &self.entries {
            if !names.insert(e.name.as_str()) {
                return Err(invalid(format!("duplicate dictionary entry '{}'", e.name)));
            }
            if e.features.len() != len {
                return Err(invalid(format!("entry '{}' has {} features, expected {len}", e.name, e.features.len())));
            }
            if !e.m_re.is_empty() && e.m_re.len() != self.frequencies_hz.len() {
                return Err(invalid(format!("entry '{}' has tensors for a different frequency grid", e.name)));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| MptError::io(path, e))?;
        let d: Self = serde_json::from_str(&text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Canonicalizes every candidate (centroid at the origin) and records its
/// spectra at its own size. Returns the per-candidate records as well.
pub fn dictionary_build(candidates: &[Candidate], frequencies_hz: &[f64], solver: &SolverOptions) -> Result<(Dictionary, Vec<Vec<MptRecord>>)> {
    let mut names = HashSet::new();
    for c in candidates {
        if !names.insert(c.name.as_str()) {
            return Err(invalid(format!("duplicate candidate name '{}'", c.name)));
        }
    }
    let mut entries = Vec::with_capacity(candidates.len());
    let mut all = Vec::with_capacity(candidates.len());
    for c in candidates {
        let canon = canonicalize(&c.mesh, &c.materials, &CanonicalOptions { solver: *solver, ..Default::default() })?;
        let s = MptSolver::new(canon.mesh.clone(), c.materials.clone(), c.alpha)?.with_options(*solver);
        let (_, records) = s.sweep_spectra(frequencies_hz)?;
        let mut e = DictionaryEntry::from_records(&c.name, &records);
        e.canonical_alpha = Some(canon.alpha);
        entries.push(e);
        all.push(records);
    }
    Ok((Dictionary::new(frequencies_hz.to_vec(), entries)?, all))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub name: String,
    pub distance: f64,
}

/// 𝒩⁰ of `entry` expressed in the principal frame of the target's Re ℳ.
fn n0_in_target_frame(n0: &Mat3, candidate_re: &Mat3, target_re: &Mat3) -> Mat3 {
    let (_, ec) = sym_eigen(candidate_re);
    let (_, et) = sym_eigen(target_re);
    let r = mat_mul(&et, &transpose(&ec));
    mat_mul(&mat_mul(&r, n0), &transpose(&r))
}

/// Features of the target under the hypothesis that it is `entry`.
fn target_features(recovered: &[ComplexTensor2], entry: &DictionaryEntry) -> Vec<f64> {
    let mut out = Vec::with_capacity(6 * recovered.len());
    for (j, m) in recovered.iter().enumerate() {
        let n0 = match (&entry.n0, entry.m_re.get(j)) {
            (Some(n0), Some(cre)) => ComplexTensor2::from_real(n0_in_target_frame(n0, cre, &m.re())),
            (Some(n0), None) => ComplexTensor2::from_real(*n0),
            _ => ComplexTensor2::zero(),
        };
        let (lr, li) = spectra_of(m, &n0);
        out.extend_from_slice(&lr);
        out.extend_from_slice(&li);
    }
    normalized(out)
}

/// All entries ranked by Euclidean distance to the target's normalized features.
pub fn dictionary_match(recovered: &[ComplexTensor2], frequencies_hz: &[f64], dictionary: &Dictionary) -> Result<Vec<MatchResult>> {
    let grid = &dictionary.frequencies_hz;
    if recovered.len() != frequencies_hz.len()
        || frequencies_hz.len() != grid.len()
        || frequencies_hz.iter().zip(grid).any(|(a, b)| (a - b).abs() > 1e-9 * b.abs().max(1.0))
    {
        return Err(invalid("recovered tensors are not on the dictionary's frequency grid"));
    }
    let mut out: Vec<MatchResult> = dictionary
        .entries
        .iter()
        .map(|e| {
            let t = target_features(recovered, e);
            let distance = t.iter().zip(&e.features).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            MatchResult { name: e.name.clone(), distance }
        })
        .collect();
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::rotation_about;

    fn record(f: f64, m: ComplexTensor2, n0: Mat3) -> MptRecord {
        MptRecord {
            frequency_hz: f,
            omega: f,
            alpha: 1.0,
            m,
            c: ComplexTensor2::zero(),
            n: ComplexTensor2::zero(),
            n0: ComplexTensor2::from_real(n0),
            nu: vec![],
            asymmetry_norm: 0.0,
        }
    }

    fn toy_entry(name: &str, s: f64) -> (DictionaryEntry, Vec<ComplexTensor2>) {
        let n0 = [[3.0 * s, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]];
        let ms: Vec<ComplexTensor2> = (1..=5)
            .map(|j| {
                let t = j as f64;
                ComplexTensor2::from_parts(
                    [[3.0 * s - t, 0.0, 0.0], [0.0, 2.0 - 0.5 * t, 0.0], [0.0, 0.0, 1.0 - 0.2 * t * s]],
                    [[0.1 * t * s, 0.0, 0.0], [0.0, 0.3 / t, 0.0], [0.0, 0.0, 0.2]],
                )
            })
            .collect();
        let recs: Vec<MptRecord> = ms.iter().enumerate().map(|(j, m)| record(j as f64 + 1.0, *m, n0)).collect();
        (DictionaryEntry::from_records(name, &recs), ms)
    }

    #[test]
    fn self_match_and_rotation_invariance() {
        let (a, ma) = toy_entry("a", 1.0);
        let (b, _) = toy_entry("b", 1.7);
        let f: Vec<f64> = (1..=5).map(|j| j as f64).collect();
        let d = Dictionary::new(f.clone(), vec![a, b]).unwrap();
        assert!(d.entries.iter().all(|e| (e.features.iter().map(|x| x.abs()).fold(0.0, f64::max) - 1.0).abs() < 1e-15));
        assert_eq!(d.entries[0].features.len(), 30);
        let r = dictionary_match(&ma, &f, &d).unwrap();
        assert_eq!(r[0].name, "a");
        assert!(r[0].distance < 1e-14);
        let rot = rotation_about([1.0, 2.0, 0.5], 0.7);
        let rotated: Vec<ComplexTensor2> = ma.iter().map(|m| m.rotated(&rot).unwrap()).collect();
        let r2 = dictionary_match(&rotated, &f, &d).unwrap();
        assert_eq!(r2[0].name, "a");
        assert!(r2[0].distance < 1e-12, "{}", r2[0].distance);
    }

    #[test]
    fn duplicates_and_grid_mismatch_rejected() {
        let (a, ma) = toy_entry("a", 1.0);
        let f: Vec<f64> = (1..=5).map(|j| j as f64).collect();
        assert!(Dictionary::new(f.clone(), vec![a.clone(), a.clone()]).is_err());
        let d = Dictionary::new(f, vec![a]).unwrap();
        let g: Vec<f64> = (2..=6).map(|j| j as f64).collect();
        assert!(dictionary_match(&ma, &g, &d).is_err());
    }
}

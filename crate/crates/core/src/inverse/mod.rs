//! Multistatic response (MSR) synthesis, MUSIC localization, MPT recovery
//! and dictionary classification.
//!
//! ```text
//!   A_kl = Σ_n (D²G(r_k, z_n) q_k) · (ℳ_n D²G(z_n, s_l) p_l)
//! ```

mod dictionary;
mod music;
mod recover;

use faer::Mat;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use dictionary::{dictionary_build, dictionary_match, Candidate, Dictionary, DictionaryEntry, MatchResult};
pub use music::{find_peaks, music_csv, music_image, noise_projector, MusicImage, Peak, PlaneGrid, MAX_RESIDUAL_FRACTION};
pub use recover::{recover_mpts, Recovery};

use crate::error::{invalid, MptError, Result};
use crate::forward::{d2g, DipoleSource, ObjectResponse};
use crate::tensor::{mat_vec, norm3, sub3, Vec3};

/// Receivers (r_k, q_k) and sources (s_l, p_l).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoilArray {
    pub receivers: Vec<DipoleSource>,
    pub sources: Vec<DipoleSource>,
}

fn check_distinct(coils: &[DipoleSource], what: &str) -> Result<()> {
    let mut pos: Vec<Vec3> = coils.iter().map(|c| c.position).collect();
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if pos.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid(format!("{what} positions must be distinct")));
    }
    Ok(())
}

impl CoilArray {
    pub fn new(receivers: Vec<DipoleSource>, sources: Vec<DipoleSource>) -> Result<Self> {
        let a = Self { receivers, sources };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if self.receivers.is_empty() || self.sources.is_empty() {
            return Err(invalid("coil array needs at least one receiver and one source"));
        }
        for c in self.receivers.iter().chain(&self.sources) {
            DipoleSource::new(c.position, c.moment)?;
        }
        check_distinct(&self.receivers, "receiver")?;
        check_distinct(&self.sources, "source")
    }

    /// n × n grid on [−h, h]² in the plane x₃ = `height`, every coil acting
    /// as both source and receiver with moment `moment`.
    pub fn planar_grid(n: usize, half_width: f64, height: f64, moment: Vec3) -> Result<Self> {
        if n < 2 {
            return Err(invalid("coil grid needs n >= 2"));
        }
        let step = 2.0 * half_width / (n - 1) as f64;
        let mut coils = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let p = [-half_width + i as f64 * step, -half_width + j as f64 * step, height];
                coils.push(DipoleSource::new(p, moment)?);
            }
        }
        Self::new(coils.clone(), coils)
    }

    pub fn k(&self) -> usize {
        self.receivers.len()
    }

    pub fn l(&self) -> usize {
        self.sources.len()
    }

    /// D²G(r_k, z) q_k for every receiver.
    pub(crate) fn receiver_vectors(&self, z: &Vec3) -> Result<Vec<Vec3>> {
        self.receivers.iter().map(|c| Ok(mat_vec(&d2g(&c.position, z)?, &c.moment))).collect()
    }

    /// D²G(z, s_l) p_l for every source.
    pub(crate) fn source_vectors(&self, z: &Vec3) -> Result<Vec<Vec3>> {
        self.sources.iter().map(|c| Ok(mat_vec(&d2g(z, &c.position)?, &c.moment))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseInfo {
    pub level: f64,
    /// 1-based index of the singular value of A₀ the level refers to.
    pub reference_index: usize,
    pub s_noise: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct MsrMatrix {
    /// K × L.
    pub a: Mat<Complex64>,
    pub frequency_hz: f64,
    pub noise: Option<NoiseInfo>,
}

impl MsrMatrix {
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        self.a.singular_values().map_err(|e| MptError::Solver(format!("SVD failed: {e:?}")))
    }
}

/// Noiseless A₀ for objects with MPTs at `frequency_hz`.
pub fn build_msr(objects: &[ObjectResponse], coils: &CoilArray, frequency_hz: f64) -> Result<MsrMatrix> {
    coils.validate()?;
    let (k, l) = (coils.k(), coils.l());
    let mut a = Mat::<Complex64>::zeros(k, l);
    for o in objects {
        for c in coils.receivers.iter().chain(&coils.sources) {
            if norm3(&sub3(&c.position, &o.z)) <= o.alpha {
                return Err(invalid(format!("coil at {:?} lies inside the object at {:?}", c.position, o.z)));
            }
        }
        let u = coils.receiver_vectors(&o.z)?;
        let v = coils.source_vectors(&o.z)?;
        // ℳ v_l once per source, then dot with each receiver vector.
        let mv: Vec<[Complex64; 3]> = v.iter().map(|v| o.mpt.apply(v.map(|x| Complex64::new(x, 0.0)))).collect();
        for (kk, u) in u.iter().enumerate() {
            for (ll, m) in mv.iter().enumerate() {
                a[(kk, ll)] += m[0] * u[0] + m[1] * u[1] + m[2] * u[2];
            }
        }
    }
    if a.col_iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(MptError::Solver("non-finite MSR entry".into()));
    }
    Ok(MsrMatrix { a, frequency_hz, noise: None })
}

/// A = A₀ + (S_noise/√L) W̃ with W̃ = (1 + i)W/√2, W i.i.d. standard normal
/// (ChaCha8 stream seeded with `seed`, ziggurat sampling, column-major order)
/// and S_noise = `level` · S_ref(A₀).
pub fn add_noise(a0: &MsrMatrix, level: f64, reference_index: usize, seed: u64) -> Result<MsrMatrix> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(invalid(format!("noise level must be >= 0, got {level}")));
    }
    let (k, l) = (a0.a.nrows(), a0.a.ncols());
    if reference_index == 0 || reference_index > k.min(l) {
        return Err(invalid(format!("reference index must be in 1..={}, got {reference_index}", k.min(l))));
    }
    if level == 0.0 {
        return Ok(MsrMatrix { noise: Some(NoiseInfo { level, reference_index, s_noise: 0.0, seed }), ..a0.clone() });
    }
    let s = a0.singular_values()?;
    let s_ref = s[reference_index - 1];
    if !(s_ref > 1e-14 * s[0]) {
        return Err(invalid(format!("reference singular value S_{reference_index} is numerically zero")));
    }
    let s_noise = level * s_ref;
    let scale = s_noise / (l as f64).sqrt() / std::f64::consts::SQRT_2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = a0.a.clone();
    for c in 0..l {
        for r in 0..k {
            let w: f64 = rng.sample(StandardNormal);
            a[(r, c)] += Complex64::new(w, w) * scale;
        }
    }
    Ok(MsrMatrix { a, frequency_hz: a0.frequency_hz, noise: Some(NoiseInfo { level, reference_index, s_noise, seed }) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ObjectCount {
    pub n_hat: usize,
    /// Set when no singular value gap exceeded the threshold.
    pub no_gap: bool,
    /// Number of singular values before the chosen gap.
    pub signal_rank: usize,
}

pub const DEFAULT_GAP_THRESHOLD: f64 = 10.0;

/// N̂ = ⌊r/3⌋ where r is the position of the largest ratio S_r/S_{r+1}
/// among the leading half of the spectrum, if that ratio exceeds `gap_threshold`.
pub fn estimate_object_count(a: &MsrMatrix, gap_threshold: f64) -> Result<ObjectCount> {
    let s = a.singular_values()?;
    if s.is_empty() || !(s[0] > 0.0) {
        return Err(invalid("MSR matrix is zero"));
    }
    let limit = (s.len() / 2).max(1).min(s.len() - 1);
    let mut best = (0, 0.0);
    for i in 0..limit {
        let ratio = if s[i + 1] > 0.0 { s[i] / s[i + 1] } else { f64::INFINITY };
        if ratio > best.1 {
            best = (i + 1, ratio);
        }
    }
    if best.1 > gap_threshold {
        Ok(ObjectCount { n_hat: best.0 / 3, no_gap: false, signal_rank: best.0 })
    } else {
        Ok(ObjectCount { n_hat: 0, no_gap: true, signal_rank: 0 })
    }
}

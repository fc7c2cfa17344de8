//! Command-line front end. Every subcommand reads one JSON [`RunConfig`],
//! validates it completely, computes, and only then writes its outputs, so a
//! rejected configuration leaves the output directory untouched.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{MptError, Result};
use crate::fem::SolverOptions;
use crate::forward::{field_csv, field_sweep, BackgroundField, DipoleSource, ObjectResponse};
use crate::inverse::{
    add_noise, build_msr, dictionary_build, dictionary_match, estimate_object_count, find_peaks, music_csv, music_image, Candidate,
    CoilArray, Dictionary, Peak, PlaneGrid, DEFAULT_GAP_THRESHOLD, MAX_RESIDUAL_FRACTION,
};
use crate::mesh::{generate_box_scene, generate_star_mesh, load_mesh, BoxMeshOptions, BoxRegion, StarMeshOptions, StarShape, TetMesh};
use crate::model::{compute_nu, omega_of, Material};
use crate::mpt::{read_mpt_records, spectra_csv, sphere_polarizability, transform_mpt, write_mpt_records, MptJson, MptSolver, SpectralSignature};
use crate::tensor::{ComplexTensor2, Mat3, Vec3};

pub const DEFAULT_TRUNCATION: f64 = 100.0;

#[derive(Debug, Parser)]
#[command(name = "mptk", version, about = "Magnetic polarizability tensors, field asymptotics, MUSIC and classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Truncation factor for generated meshes (overrides `truncation_factor`).
    #[arg(long, global = true)]
    pub truncation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// FEM tensors over a frequency sweep: mpt.json and spectra.csv.
    Mpt,
    /// Closed-form sphere tensors: oracle.json.
    OracleSphere,
    /// Perturbed field at probe points: field.csv.
    Forward,
    /// MUSIC image of synthetic MSR data: music.csv and locate.json.
    Locate,
    /// Dictionary classification.
    Classify {
        #[command(subcommand)]
        action: ClassifyAction,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum ClassifyAction {
    /// Build dictionary.json from candidate objects.
    Build,
    /// Rank dictionary entries against recovered tensors: match.json.
    Match,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    /// JSON or Gmsh 2.x ASCII file.
    File { path: PathBuf },
    /// O-grid mesh of a star-shaped unit object.
    Star {
        shape: StarShape,
        #[serde(default)]
        core_divisions: Option<usize>,
        #[serde(default)]
        growth: Option<f64>,
    },
    /// Union of axis-aligned boxes.
    Boxes {
        boxes: Vec<BoxRegion>,
        #[serde(default)]
        h: Option<f64>,
        #[serde(default)]
        growth: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MptSource {
    /// Closed-form sphere of the object's size.
    Sphere { sigma: f64, mu_r: f64 },
    /// Fixed tensor (used at every frequency).
    Tensor { re: Mat3, im: Mat3 },
    /// Records written by `mptk mpt`, matched by frequency.
    Records { path: PathBuf },
    /// FEM solve on the given unit-size mesh at the object's size.
    Fem { mesh: MeshSpec, materials: Vec<Material> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub z: Vec3,
    pub alpha: f64,
    pub mpt: MptSource,
    /// Orientation R applied as R ℳ Rᵀ.
    #[serde(default)]
    pub rotation: Option<Mat3>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoilSpec {
    PlanarGrid { n: usize, half_width: f64, height: f64, moment: Vec3 },
    Explicit { receivers: Vec<DipoleSource>, sources: Vec<DipoleSource> },
}

impl CoilSpec {
    fn build(&self) -> Result<CoilArray> {
        match self {
            CoilSpec::PlanarGrid { n, half_width, height, moment } => CoilArray::planar_grid(*n, *half_width, *height, *moment),
            CoilSpec::Explicit { receivers, sources } => CoilArray::new(receivers.clone(), sources.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub level: f64,
    /// 1-based singular value index of A₀ the level refers to.
    pub reference_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSpec {
    pub name: String,
    pub mesh: MeshSpec,
    pub materials: Vec<Material>,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    /// MPT records (as written by `mptk mpt`) on the dictionary's frequency grid.
    pub records: PathBuf,
}

/// One JSON document drives every subcommand; each uses the fields it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mesh: Option<MeshSpec>,
    #[serde(default)]
    pub materials: Vec<Material>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub frequencies_hz: Vec<f64>,
    #[serde(default)]
    pub truncation_factor: Option<f64>,
    #[serde(default)]
    pub solver: Option<SolverOptions>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub background: Option<BackgroundField>,
    #[serde(default)]
    pub probes: Vec<Vec3>,
    #[serde(default)]
    pub coils: Option<CoilSpec>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub grid: Option<PlaneGrid>,
    #[serde(default)]
    pub n_objects: Option<usize>,
    #[serde(default)]
    pub candidates: Vec<CandidateSpec>,
    #[serde(default)]
    pub dictionary: Option<PathBuf>,
    #[serde(default)]
    pub target: Option<TargetSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    fn header(&self) -> String {
        format!("{} {} config_sha256={} seed={}", self.tool, self.version, self.config_sha256, self.seed)
    }
}

/// A parsed configuration with CLI overrides applied and paths resolved.
pub struct Run {
    pub command: Command,
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
    pub truncation: f64,
    pub provenance: Provenance,
}

fn config_err(msg: impl Into<String>) -> MptError {
    MptError::Config(msg.into())
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Run {
    pub fn from_text(command: Command, text: &str, base_dir: &Path, cli: &Cli) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| config_err(format!("{e}")))?;
        let seed = cli.seed.or(config.seed).unwrap_or(0);
        let truncation = cli.truncation.or(config.truncation_factor).unwrap_or(DEFAULT_TRUNCATION);
        let out_dir = cli
            .out
            .clone()
            .or_else(|| config.output_dir.as_ref().map(|p| base_dir.join(p)))
            .unwrap_or_else(|| PathBuf::from("."));
        let provenance = Provenance { tool: "mptk", version: env!("CARGO_PKG_VERSION"), config_sha256: sha256_hex(text.as_bytes()), seed };
        let run = Self { command, config, base_dir: base_dir.to_path_buf(), out_dir, truncation, provenance };
        run.validate()?;
        Ok(run)
    }

    fn path(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    fn solver(&self) -> SolverOptions {
        self.config.solver.unwrap_or_default()
    }

    fn alpha(&self) -> Result<f64> {
        match self.config.alpha {
            Some(a) if a > 0.0 && a.is_finite() => Ok(a),
            Some(a) => Err(config_err(format!("alpha must be > 0, got {a}"))),
            None => Err(config_err("missing 'alpha'")),
        }
    }

    fn frequencies(&self, exactly_one: bool) -> Result<&[f64]> {
        let f = &self.config.frequencies_hz;
        if f.is_empty() {
            return Err(config_err("'frequencies_hz' must not be empty"));
        }
        if exactly_one && f.len() != 1 {
            return Err(config_err("this command takes exactly one frequency"));
        }
        if f.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(config_err("frequencies must be finite and >= 0"));
        }
        Ok(f)
    }

    fn validate_mesh_spec(&self, m: &MeshSpec, materials: &[Material]) -> Result<()> {
        if materials.is_empty() {
            return Err(config_err("at least one material is required"));
        }
        for mat in materials {
            mat.validate().map_err(|e| config_err(e.to_string()))?;
        }
        match m {
            MeshSpec::File { path } if !self.path(path).is_file() => Err(config_err(format!("mesh file {} not found", path.display()))),
            MeshSpec::Star { shape, .. } => shape.validate(),
            MeshSpec::Boxes { boxes, .. } if boxes.is_empty() => Err(config_err("'boxes' must not be empty")),
            _ => Ok(()),
        }
    }

    fn validate_objects(&self) -> Result<()> {
        if self.config.objects.is_empty() {
            return Err(config_err("'objects' must not be empty"));
        }
        for o in &self.config.objects {
            if !(o.alpha > 0.0 && o.alpha.is_finite()) {
                return Err(config_err("object alpha must be > 0"));
            }
            match &o.mpt {
                MptSource::Sphere { sigma, mu_r } => Material::new(*sigma, *mu_r).map(|_| ())?,
                MptSource::Records { path } if !self.path(path).is_file() => {
                    return Err(config_err(format!("records file {} not found", path.display())))
                }
                MptSource::Fem { mesh, materials } => self.validate_mesh_spec(mesh, materials)?,
                _ => {}
            }
        }
        Ok(())
    }

    /// Rejects missing or malformed inputs before any computation.
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation >= crate::mesh::MIN_TRUNCATION_FACTOR) {
            return Err(config_err(format!("truncation factor must be >= {}", crate::mesh::MIN_TRUNCATION_FACTOR)));
        }
        let c = &self.config;
        match self.command {
            Command::Mpt => {
                self.alpha()?;
                self.frequencies(false)?;
                let mesh = c.mesh.as_ref().ok_or_else(|| config_err("missing 'mesh'"))?;
                self.validate_mesh_spec(mesh, &c.materials)?;
            }
            Command::OracleSphere => {
                self.alpha()?;
                self.frequencies(false)?;
                if c.materials.len() != 1 {
                    return Err(config_err("oracle-sphere takes exactly one material"));
                }
                c.materials[0].validate()?;
            }
            Command::Forward => {
                self.frequencies(true)?;
                self.validate_objects()?;
                if c.background.is_none() {
                    return Err(config_err("missing 'background'"));
                }
                if c.probes.is_empty() {
                    return Err(config_err("'probes' must not be empty"));
                }
            }
            Command::Locate => {
                self.frequencies(true)?;
                self.validate_objects()?;
                c.coils.as_ref().ok_or_else(|| config_err("missing 'coils'"))?.build()?;
                c.grid.ok_or_else(|| config_err("missing 'grid'"))?.validate()?;
                if let Some(n) = c.noise {
                    if !(n.level >= 0.0) || n.reference_index == 0 {
                        return Err(config_err("noise needs level >= 0 and reference_index >= 1"));
                    }
                }
                if c.n_objects == Some(0) {
                    return Err(config_err("n_objects must be >= 1"));
                }
            }
            Command::Classify { action: ClassifyAction::Build } => {
                self.frequencies(false)?;
                if c.candidates.is_empty() {
                    return Err(config_err("'candidates' must not be empty"));
                }
                for cand in &c.candidates {
                    self.validate_mesh_spec(&cand.mesh, &cand.materials)?;
                    if !(cand.alpha > 0.0) {
                        return Err(config_err(format!("candidate '{}' needs alpha > 0", cand.name)));
                    }
                }
            }
            Command::Classify { action: ClassifyAction::Match } => {
                let d = c.dictionary.as_ref().ok_or_else(|| config_err("missing 'dictionary'"))?;
                if !self.path(d).is_file() {
                    return Err(config_err(format!("dictionary {} not found", d.display())));
                }
                let t = c.target.as_ref().ok_or_else(|| config_err("missing 'target'"))?;
                if !self.path(&t.records).is_file() {
                    return Err(config_err(format!("target records {} not found", t.records.display())));
                }
            }
        }
        Ok(())
    }

    fn build_mesh(&self, spec: &MeshSpec) -> Result<TetMesh> {
        match spec {
            MeshSpec::File { path } => load_mesh(self.path(path)),
            MeshSpec::Star { shape, core_divisions, growth } => {
                let d = StarMeshOptions::default();
                generate_star_mesh(
                    shape,
                    &StarMeshOptions {
                        core_divisions: core_divisions.unwrap_or(d.core_divisions),
                        growth: growth.unwrap_or(d.growth),
                        truncation_factor: self.truncation,
                    },
                )
            }
            MeshSpec::Boxes { boxes, h, growth } => {
                let d = BoxMeshOptions::default();
                generate_box_scene(
                    boxes,
                    &BoxMeshOptions { truncation_factor: self.truncation, h: h.unwrap_or(d.h), growth: growth.unwrap_or(d.growth) },
                )
            }
        }
    }

    fn object_responses(&self, frequency_hz: f64) -> Result<Vec<ObjectResponse>> {
        let omega = omega_of(frequency_hz);
        self.config
            .objects
            .iter()
            .map(|o| {
                let m = match &o.mpt {
                    MptSource::Sphere { sigma, mu_r } => ComplexTensor2::isotropic(sphere_polarizability(o.alpha, *sigma, *mu_r, omega)?),
                    MptSource::Tensor { re, im } => ComplexTensor2::from_parts(*re, *im),
                    MptSource::Records { path } => {
                        let recs = read_mpt_records(&self.path(path))?;
                        let r = recs
                            .iter()
                            .find(|r| (r.f_hz - frequency_hz).abs() <= 1e-9 * frequency_hz.max(1.0))
                            .ok_or_else(|| config_err(format!("{} has no record at {frequency_hz} Hz", path.display())))?;
                        ComplexTensor2::from_parts(r.M_re, r.M_im)
                    }
                    MptSource::Fem { mesh, materials } => {
                        let mesh = Arc::new(self.build_mesh(mesh)?);
                        MptSolver::new(mesh, materials.clone(), o.alpha)?.with_options(self.solver()).at_frequency(frequency_hz)?.0.m
                    }
                };
                let m = match &o.rotation {
                    Some(r) => transform_mpt(&m, r)?,
                    None => m,
                };
                Ok(ObjectResponse { z: o.z, alpha: o.alpha, mpt: m })
            })
            .collect()
    }

    fn json<T: Serialize>(&self, body: &T) -> Result<String> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            provenance: &'a Provenance,
            #[serde(flatten)]
            body: &'a T,
        }
        Ok(serde_json::to_string_pretty(&Wrapped { provenance: &self.provenance, body })? + "\n")
    }

    /// Runs the command and returns `(file name, contents)` pairs.
    pub fn execute(&self) -> Result<Vec<(String, String)>> {
        match self.command {
            Command::Mpt => self.cmd_mpt(),
            Command::OracleSphere => self.cmd_oracle_sphere(),
            Command::Forward => self.cmd_forward(),
            Command::Locate => self.cmd_locate(),
            Command::Classify { action: ClassifyAction::Build } => self.cmd_classify_build(),
            Command::Classify { action: ClassifyAction::Match } => self.cmd_classify_match(),
        }
    }

    fn records_json(&self, records: &[MptJson]) -> Result<String> {
        #[derive(Serialize)]
        struct Body<'a> {
            records: &'a [MptJson],
        }
        self.json(&Body { records })
    }

    fn cmd_mpt(&self) -> Result<Vec<(String, String)>> {
        let mesh = Arc::new(self.build_mesh(self.config.mesh.as_ref().expect("validated"))?);
        let solver = MptSolver::new(mesh, self.config.materials.clone(), self.alpha()?)?.with_options(self.solver());
        let records = solver.sweep(self.frequencies(false)?)?;
        let json: Vec<MptJson> = records.iter().map(MptJson::from).collect();
        let sig = SpectralSignature::from_records(&records);
        Ok(vec![
            ("mpt.json".into(), self.records_json(&json)?),
            ("spectra.csv".into(), spectra_csv(&sig, Some(&self.provenance.header()))),
        ])
    }

    fn cmd_oracle_sphere(&self) -> Result<Vec<(String, String)>> {
        let m = self.config.materials[0];
        let alpha = self.alpha()?;
        let n0 = sphere_polarizability(alpha, m.sigma, m.mu_r, 0.0)?.re;
        let records = self
            .frequencies(false)?
            .iter()
            .map(|&f| {
                let omega = omega_of(f);
                let t = ComplexTensor2::isotropic(sphere_polarizability(alpha, m.sigma, m.mu_r, omega)?);
                Ok(MptJson {
                    f_hz: f,
                    alpha,
                    M_re: t.re(),
                    M_im: t.im(),
                    N0: ComplexTensor2::isotropic(n0.into()).re(),
                    nu: vec![compute_nu(&m, alpha, omega)?.value],
                    asymmetry_norm: 0.0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(vec![("oracle.json".into(), self.records_json(&records)?)])
    }

    fn cmd_forward(&self) -> Result<Vec<(String, String)>> {
        let f = self.frequencies(true)?[0];
        let objects = self.object_responses(f)?;
        let h0 = self.config.background.expect("validated");
        let values = field_sweep(&objects, &h0, &self.config.probes)?;
        Ok(vec![("field.csv".into(), field_csv(&self.config.probes, &values, Some(&self.provenance.header())))])
    }

    fn cmd_locate(&self) -> Result<Vec<(String, String)>> {
        let f = self.frequencies(true)?[0];
        let objects = self.object_responses(f)?;
        let coils = self.config.coils.as_ref().expect("validated").build()?;
        let grid = self.config.grid.expect("validated");
        let a0 = build_msr(&objects, &coils, f)?;
        let a = match self.config.noise {
            Some(n) => add_noise(&a0, n.level, n.reference_index, self.provenance.seed)?,
            None => a0,
        };
        let count = estimate_object_count(&a, DEFAULT_GAP_THRESHOLD)?;
        let s = a.singular_values()?;
        let n_objects = match self.config.n_objects {
            Some(n) => n,
            None if count.n_hat > 0 => count.n_hat,
            None => return Err(config_err("no singular value gap found; set 'n_objects'")),
        };
        let rank = s.iter().filter(|v| **v > 1e-12 * s[0]).count();
        if 3 * n_objects > rank {
            return Err(config_err(format!("n_objects = {n_objects} needs rank {} but the MSR matrix has rank {rank}", 3 * n_objects)));
        }
        let image = music_image(&a, &coils, &grid, n_objects)?;
        let peaks = find_peaks(&image, MAX_RESIDUAL_FRACTION);
        #[derive(Serialize)]
        struct Summary<'a> {
            n_hat: usize,
            no_gap: bool,
            n_objects: usize,
            singular_values: &'a [f64],
            skipped_points: &'a [usize],
            peaks: &'a [Peak],
        }
        let summary = Summary {
            n_hat: count.n_hat,
            no_gap: count.no_gap,
            n_objects,
            singular_values: &s[..s.len().min(3 * n_objects + 3)],
            skipped_points: &image.skipped,
            peaks: &peaks,
        };
        Ok(vec![
            ("music.csv".into(), music_csv(&image, Some(&self.provenance.header()))),
            ("locate.json".into(), self.json(&summary)?),
        ])
    }

    fn cmd_classify_build(&self) -> Result<Vec<(String, String)>> {
        let candidates = self
            .config
            .candidates
            .iter()
            .map(|c| {
                Ok(Candidate { name: c.name.clone(), mesh: Arc::new(self.build_mesh(&c.mesh)?), materials: c.materials.clone(), alpha: c.alpha })
            })
            .collect::<Result<Vec<_>>>()?;
        let (dict, _) = dictionary_build(&candidates, self.frequencies(false)?, &self.solver())?;
        Ok(vec![("dictionary.json".into(), self.json(&dict)?)])
    }

    fn cmd_classify_match(&self) -> Result<Vec<(String, String)>> {
        let dict = Dictionary::load(&self.path(self.config.dictionary.as_ref().expect("validated")))?;
        let recs = read_mpt_records(&self.path(&self.config.target.as_ref().expect("validated").records))?;
        let tensors: Vec<ComplexTensor2> = recs.iter().map(|r| ComplexTensor2::from_parts(r.M_re, r.M_im)).collect();
        let freqs: Vec<f64> = recs.iter().map(|r| r.f_hz).collect();
        let ranking = dictionary_match(&tensors, &freqs, &dict)?;
        #[derive(Serialize)]
        struct Body<'a> {
            ranking: &'a [crate::inverse::MatchResult],
        }
        Ok(vec![("match.json".into(), self.json(&Body { ranking: &ranking })?)])
    }
}

/// Parses the configuration, runs the command and writes its outputs.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let path = cli.config.as_ref().ok_or_else(|| config_err("--config is required"))?;
    let text = std::fs::read_to_string(path).map_err(|e| MptError::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let run = Run::from_text(cli.command, &text, &base, cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config_err("--threads must be >= 1"));
        }
        // Ignored if a global pool already exists (e.g. in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outputs = run.execute()?;
    std::fs::create_dir_all(&run.out_dir).map_err(|e| MptError::io(&run.out_dir, e))?;
    let mut written = Vec::with_capacity(outputs.len());
    for (name, contents) in outputs {
        let p = run.out_dir.join(name);
        std::fs::write(&p, contents).map_err(|e| MptError::io(&p, e))?;
        written.push(p);
    }
    Ok(written)
}

/// Loads a record file written by `mptk mpt` or `mptk oracle-sphere`.
pub fn load_records(path: &Path) -> Result<Vec<MptJson>> {
    read_mpt_records(path)
}

/// Records JSON without the CLI wrapper, for library users.
pub fn save_records(path: &Path, records: &[MptJson]) -> Result<()> {
    write_mpt_records(path, &serde_json::Value::Null, records)
}

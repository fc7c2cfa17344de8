//! Physical constants, materials, objects and the induction number.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, MptError, Result};
use crate::tensor::{add3, check_orthogonal, cross3, dot3, mat_vec, norm3, scale3, sub3, Mat3, Vec3, IDENTITY3};

/// Vacuum permeability, H/m.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Above this induction number the leading-order asymptotics are strained.
pub const NU_WARN_THRESHOLD: f64 = 1e4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    /// Conductivity, S/m.
    pub sigma: f64,
    /// Relative permeability.
    pub mu_r: f64,
}

impl Material {
    pub fn new(sigma: f64, mu_r: f64) -> Result<Self> {
        let m = Self { sigma, mu_r };
        m.validate()?;
        Ok(m)
    }

    pub const fn free_space() -> Self {
        Self { sigma: 0.0, mu_r: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid(format!("conductivity must be finite and >= 0, got {}", self.sigma)));
        }
        if !(self.mu_r > 0.0 && self.mu_r.is_finite()) {
            return Err(invalid(format!("relative permeability must be finite and > 0, got {}", self.mu_r)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nu {
    pub value: f64,
    /// Set when `value` exceeds [`NU_WARN_THRESHOLD`].
    pub strained: bool,
}

/// ν = ω μ₀ σ α².
pub fn compute_nu(material: &Material, alpha: f64, omega: f64) -> Result<Nu> {
    material.validate()?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must be > 0, got {alpha}")));
    }
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(invalid(format!("omega must be >= 0, got {omega}")));
    }
    let value = omega * MU0 * material.sigma * alpha * alpha;
    Ok(Nu { value, strained: value > NU_WARN_THRESHOLD })
}

pub fn omega_of(frequency_hz: f64) -> f64 {
    2.0 * std::f64::consts::PI * frequency_hz
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub nu: Vec<f64>,
    pub omega: f64,
    pub frequency_hz: f64,
}

impl DimensionlessParams {
    pub fn new(materials: &[Material], alpha: f64, frequency_hz: f64) -> Result<Self> {
        let omega = omega_of(frequency_hz);
        let nu = materials.iter().map(|m| compute_nu(m, alpha, omega).map(|n| n.value)).collect::<Result<_>>()?;
        Ok(Self { nu, omega, frequency_hz })
    }
}

/// Closed triangulated surface in unit-shape coordinates, outward oriented.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Surface {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl Surface {
    /// Generalized winding number of `p`; ≈1 inside, ≈0 outside.
    pub fn winding_number(&self, p: &Vec3) -> f64 {
        let mut total = 0.0;
        for t in &self.triangles {
            let a = sub3(&self.vertices[t[0]], p);
            let b = sub3(&self.vertices[t[1]], p);
            let c = sub3(&self.vertices[t[2]], p);
            let (la, lb, lc) = (norm3(&a), norm3(&b), norm3(&c));
            let num = dot3(&a, &cross3(&b, &c));
            let den = la * lb * lc + dot3(&a, &b) * lc + dot3(&b, &c) * la + dot3(&c, &a) * lb;
            total += 2.0 * num.atan2(den);
        }
        total / (4.0 * std::f64::consts::PI)
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.winding_number(p) > 0.5
    }
}

/// A unit-scale shape placed in space: `B_α = z + α R B`.
#[derive(Clone, Debug)]
pub struct ObjectInstance {
    pub shape_id: String,
    pub surface: Arc<Surface>,
    pub alpha: f64,
    pub z: Vec3,
    pub rotation: Mat3,
    /// One material per object region, in tag order (region 1 first).
    pub materials: Vec<Material>,
}

impl ObjectInstance {
    pub fn new(shape_id: impl Into<String>, surface: Arc<Surface>, alpha: f64, z: Vec3, materials: Vec<Material>) -> Result<Self> {
        let o = Self { shape_id: shape_id.into(), surface, alpha, z, rotation: IDENTITY3, materials };
        o.validate()?;
        Ok(o)
    }

    pub fn with_rotation(mut self, rotation: Mat3) -> Result<Self> {
        self.rotation = rotation;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("object {}: alpha must be > 0", self.shape_id)));
        }
        check_orthogonal(&self.rotation, 1e-12)?;
        if self.materials.is_empty() {
            return Err(invalid(format!("object {}: at least one region material required", self.shape_id)));
        }
        for m in &self.materials {
            m.validate()?;
        }
        Ok(())
    }

    pub fn is_inhomogeneous(&self) -> bool {
        self.materials.len() >= 2
    }

    /// Unit-shape point mapped to physical space.
    pub fn to_world(&self, xi: &Vec3) -> Vec3 {
        add3(&self.z, &scale3(&mat_vec(&self.rotation, xi), self.alpha))
    }

    /// Physical point mapped back to unit-shape coordinates.
    pub fn to_shape(&self, x: &Vec3) -> Vec3 {
        let d = scale3(&sub3(x, &self.z), 1.0 / self.alpha);
        let r = &self.rotation;
        [
            r[0][0] * d[0] + r[1][0] * d[1] + r[2][0] * d[2],
            r[0][1] * d[0] + r[1][1] * d[1] + r[2][1] * d[2],
            r[0][2] * d[0] + r[1][2] * d[1] + r[2][2] * d[2],
        ]
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        self.surface.contains(&self.to_shape(x))
    }

    pub fn world_vertices(&self) -> Vec<Vec3> {
        self.surface.vertices.iter().map(|v| self.to_world(v)).collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Scene {
    pub objects: Vec<ObjectInstance>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SceneReport {
    /// `None` for a single object.
    pub min_separation: Option<f64>,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub well_spaced: bool,
    /// (i, j, separation) for every pair.
    pub pair_separations: Vec<(usize, usize, f64)>,
}

/// Checks the scene and reports whether the objects are well spaced
/// (minimum boundary separation at least α_max).
pub fn validate_scene(scene: &Scene) -> Result<SceneReport> {
    if scene.objects.is_empty() {
        return Err(invalid("scene has no objects"));
    }
    for o in &scene.objects {
        o.validate()?;
    }
    let alpha_max = scene.objects.iter().map(|o| o.alpha).fold(0.0, f64::max);
    let alpha_min = scene.objects.iter().map(|o| o.alpha).fold(f64::INFINITY, f64::min);
    let verts: Vec<Vec<Vec3>> = scene.objects.iter().map(|o| o.world_vertices()).collect();
    let mut pairs = Vec::new();
    for i in 0..scene.objects.len() {
        for j in i + 1..scene.objects.len() {
            let mut d2 = f64::INFINITY;
            for a in &verts[i] {
                for b in &verts[j] {
                    let d = sub3(a, b);
                    d2 = d2.min(dot3(&d, &d));
                }
            }
            let d = d2.sqrt();
            let touching = d <= 1e-12 * alpha_max;
            let inside = verts[i].iter().any(|v| scene.objects[j].contains(v))
                || verts[j].iter().any(|v| scene.objects[i].contains(v));
            if touching || inside {
                return Err(MptError::InvalidArgument(format!("objects {i} and {j} overlap")));
            }
            pairs.push((i, j, d));
        }
    }
    let min_separation = pairs.iter().map(|p| p.2).reduce(f64::min);
    let well_spaced = min_separation.map_or(true, |d| d >= alpha_max);
    Ok(SceneReport { min_separation, alpha_min, alpha_max, well_spaced, pair_separations: pairs })
}

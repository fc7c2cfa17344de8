//! Structured mesh generators.
//!
//! `generate_box_scene` meshes unions of axis-aligned boxes on a graded
//! tensor grid. `generate_star_mesh` meshes a star-shaped object with an
//! O-grid: an index cube whose inner part is mapped radially onto the shape
//! and whose outer layers blend into the truncation cube.

use serde::{Deserialize, Serialize};

use super::{signed_volume, TetMesh};
use crate::error::{MptError, Result};
use crate::tensor::{add3, cross3, dot3, norm3, scale3, sub3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxRegion {
    pub min: Vec3,
    pub max: Vec3,
    pub tag: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxMeshOptions {
    /// Half-width of the truncation cube in units of the largest object diameter.
    pub truncation_factor: f64,
    /// Target cell size inside the object bounding box.
    pub h: f64,
    /// Cell growth ratio outside the object bounding box.
    pub growth: f64,
}

impl Default for BoxMeshOptions {
    fn default() -> Self {
        Self { truncation_factor: 100.0, h: 0.25, growth: 1.5 }
    }
}

pub const MIN_TRUNCATION_FACTOR: f64 = 10.0;

fn check_truncation(tf: f64) -> Result<()> {
    if !(tf >= MIN_TRUNCATION_FACTOR) {
        return Err(MptError::InvalidArgument(format!(
            "truncation factor must be >= {MIN_TRUNCATION_FACTOR}, got {tf}"
        )));
    }
    Ok(())
}

/// The six Kuhn tets of the unit hex, as corner bit masks (x=1, y=2, z=4).
fn kuhn_tets() -> [[usize; 4]; 6] {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = [[0; 4]; 6];
    for (t, p) in perms.iter().enumerate() {
        let mut v = 0usize;
        out[t][0] = 0;
        for (s, axis) in p.iter().enumerate() {
            v |= 1 << axis;
            out[t][s + 1] = v;
        }
    }
    out
}

/// Structured hex grid, split into tets, with tags assigned per hex.
fn kuhn_mesh(nodes: Vec<Vec3>, dims: [usize; 3], tag_of: impl Fn(usize, usize, usize) -> u32) -> Result<TetMesh> {
    let [nx, ny, nz] = dims;
    let id = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let kuhn = kuhn_tets();
    let mut tets = Vec::with_capacity(nx * ny * nz * 6);
    let mut tags = Vec::with_capacity(nx * ny * nz * 6);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let corner = |m: usize| id(i + (m & 1), j + ((m >> 1) & 1), k + ((m >> 2) & 1));
                let tag = tag_of(i, j, k);
                for kt in &kuhn {
                    let mut t = [corner(kt[0]), corner(kt[1]), corner(kt[2]), corner(kt[3])];
                    if signed_volume(&nodes[t[0]], &nodes[t[1]], &nodes[t[2]], &nodes[t[3]]) < 0.0 {
                        t.swap(1, 2);
                    }
                    tets.push(t);
                    tags.push(tag);
                }
            }
        }
    }
    TetMesh::new(nodes, tets, tags)
}

fn graded_axis(breaks: &[f64], h: f64, growth: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut inner = vec![breaks[0]];
    for w in breaks.windows(2) {
        let n = ((w[1] - w[0]) / h - 1e-9).ceil().max(1.0) as usize;
        for s in 1..=n {
            inner.push(w[0] + (w[1] - w[0]) * s as f64 / n as f64);
        }
    }
    let outward = |start: f64, first: f64, bound: f64, dir: f64| {
        let mut pts = Vec::new();
        let mut pos = start;
        let mut step = first * growth;
        loop {
            let remaining = (bound - pos) * dir;
            if remaining <= step * 1.5 {
                pts.push(bound);
                break;
            }
            pos += dir * step;
            pts.push(pos);
            step *= growth;
        }
        pts
    };
    let first_lo = inner[1] - inner[0];
    let first_hi = inner[inner.len() - 1] - inner[inner.len() - 2];
    let mut lower = outward(inner[0], first_lo, lo, -1.0);
    lower.reverse();
    let upper = outward(inner[inner.len() - 1], first_hi, hi, 1.0);
    lower.into_iter().chain(inner).chain(upper).collect()
}

fn boxes_touch(a: &BoxRegion, b: &BoxRegion) -> bool {
    (0..3).all(|k| a.min[k] <= b.max[k] && b.min[k] <= a.max[k])
}

/// Largest bounding-box diagonal over groups of mutually touching boxes.
fn max_object_diameter(regions: &[BoxRegion]) -> f64 {
    let n = regions.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        g[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if boxes_touch(&regions[i], &regions[j]) {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                group[a] = b;
            }
        }
    }
    let mut best: f64 = 0.0;
    for root in 0..n {
        let members: Vec<&BoxRegion> = (0..n).filter(|&i| find(&mut group, i) == root).map(|i| &regions[i]).collect();
        if members.is_empty() {
            continue;
        }
        let mut d2 = 0.0;
        for k in 0..3 {
            let lo = members.iter().map(|b| b.min[k]).fold(f64::INFINITY, f64::min);
            let hi = members.iter().map(|b| b.max[k]).fold(f64::NEG_INFINITY, f64::max);
            d2 += (hi - lo) * (hi - lo);
        }
        best = best.max(d2.sqrt());
    }
    best
}

/// Meshes a union of tagged axis-aligned boxes inside a graded truncation cube.
///
/// Every box face lies on a grid plane, so shared interfaces are conforming by
/// construction. Overlapping boxes are rejected.
pub fn generate_box_scene(regions: &[BoxRegion], opts: &BoxMeshOptions) -> Result<TetMesh> {
    check_truncation(opts.truncation_factor)?;
    if regions.is_empty() {
        return Err(MptError::InvalidArgument("no object boxes given".into()));
    }
    if !(opts.h > 0.0) || !(opts.growth >= 1.0) {
        return Err(MptError::InvalidArgument("cell size must be > 0 and growth >= 1".into()));
    }
    for (i, b) in regions.iter().enumerate() {
        if b.tag == 0 {
            return Err(MptError::InvalidArgument(format!("box {i}: tag 0 is reserved for free space")));
        }
        if !(0..3).all(|k| b.max[k] > b.min[k]) {
            return Err(MptError::InvalidArgument(format!("box {i} is degenerate or inverted")));
        }
        for (j, c) in regions.iter().enumerate().skip(i + 1) {
            let overlap = (0..3).all(|k| b.min[k] < c.max[k] - 1e-12 && c.min[k] < b.max[k] - 1e-12);
            if overlap {
                return Err(MptError::InvalidArgument(format!("boxes {i} and {j} overlap (non-conforming)")));
            }
        }
    }
    let diameter = max_object_diameter(regions);
    let half = opts.truncation_factor * diameter;
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(3);
    for k in 0..3 {
        let mut br: Vec<f64> = regions.iter().flat_map(|b| [b.min[k], b.max[k]]).collect();
        br.sort_by(f64::total_cmp);
        br.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let centre = 0.5 * (br[0] + br[br.len() - 1]);
        axes.push(graded_axis(&br, opts.h, opts.growth, centre - half, centre + half));
    }
    let dims = [axes[0].len() - 1, axes[1].len() - 1, axes[2].len() - 1];
    let mut nodes = Vec::with_capacity((dims[0] + 1) * (dims[1] + 1) * (dims[2] + 1));
    for &z in &axes[2] {
        for &y in &axes[1] {
            for &x in &axes[0] {
                nodes.push([x, y, z]);
            }
        }
    }
    let centre_tag = |i: usize, j: usize, k: usize| {
        let c = [0.5 * (axes[0][i] + axes[0][i + 1]), 0.5 * (axes[1][j] + axes[1][j + 1]), 0.5 * (axes[2][k] + axes[2][k + 1])];
        regions.iter().find(|b| (0..3).all(|a| c[a] > b.min[a] && c[a] < b.max[a])).map_or(0, |b| b.tag)
    };
    kuhn_mesh(nodes, dims, centre_tag)
}

/// Shapes that are star-shaped about the origin, described by their radial
/// function ρ(û) (distance from the origin to the surface along û).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StarShape {
    Sphere,
    /// Cylinder (coin) with axis e₃.
    Cylinder { radius: f64, half_height: f64 },
    /// Convex polyhedron given by its vertices; the origin must be interior.
    Tetrahedron { vertices: [Vec3; 4] },
}

impl StarShape {
    pub fn regular_tetrahedron() -> Self {
        let s = 1.0 / 3f64.sqrt();
        StarShape::Tetrahedron { vertices: [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]] }
    }

    /// Coin of given radius and thickness, scaled to unit circumradius.
    /// Returns the shape and the circumradius used as length scale.
    pub fn coin(radius: f64, thickness: f64) -> (Self, f64) {
        let c = (radius * radius + 0.25 * thickness * thickness).sqrt();
        (StarShape::Cylinder { radius: radius / c, half_height: 0.5 * thickness / c }, c)
    }

    fn planes(vertices: &[Vec3; 4]) -> Vec<(Vec3, f64)> {
        let mut out = Vec::with_capacity(4);
        for skip in 0..4 {
            let f: Vec<&Vec3> = (0..4).filter(|&i| i != skip).map(|i| &vertices[i]).collect();
            let mut n = cross3(&sub3(f[1], f[0]), &sub3(f[2], f[0]));
            let l = norm3(&n);
            n = scale3(&n, 1.0 / l);
            let mut d = dot3(&n, f[0]);
            if dot3(&n, &vertices[skip]) > d {
                n = scale3(&n, -1.0);
                d = -d;
            }
            out.push((n, d));
        }
        out
    }

    pub fn radius(&self, u: &Vec3) -> f64 {
        match self {
            StarShape::Sphere => 1.0,
            StarShape::Cylinder { radius, half_height } => {
                let rxy = (u[0] * u[0] + u[1] * u[1]).sqrt();
                let a = if rxy > 0.0 { radius / rxy } else { f64::INFINITY };
                let b = if u[2] != 0.0 { half_height / u[2].abs() } else { f64::INFINITY };
                a.min(b)
            }
            StarShape::Tetrahedron { vertices } => Self::planes(vertices)
                .iter()
                .filter_map(|(n, d)| {
                    let c = dot3(n, u);
                    (c > 0.0).then(|| d / c)
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Half extents used to stretch the index cube before projecting onto the
    /// surface, so cube edges land on the rims of flat shapes.
    fn aspect(&self) -> Vec3 {
        match self {
            StarShape::Cylinder { radius, half_height } => [*radius, *radius, *half_height],
            _ => [1.0; 3],
        }
    }

    pub fn circumradius(&self) -> f64 {
        match self {
            StarShape::Sphere => 1.0,
            StarShape::Cylinder { radius, half_height } => (radius * radius + half_height * half_height).sqrt(),
            StarShape::Tetrahedron { vertices } => vertices.iter().map(norm3).fold(0.0, f64::max),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            StarShape::Sphere => 2.0,
            StarShape::Cylinder { .. } => 2.0 * self.circumradius(),
            StarShape::Tetrahedron { vertices } => {
                let mut d: f64 = 0.0;
                for a in vertices {
                    for b in vertices {
                        d = d.max(norm3(&sub3(a, b)));
                    }
                }
                d
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            StarShape::Sphere => 4.0 * std::f64::consts::PI / 3.0,
            StarShape::Cylinder { radius, half_height } => std::f64::consts::PI * radius * radius * 2.0 * half_height,
            StarShape::Tetrahedron { vertices: v } => signed_volume(&v[0], &v[1], &v[2], &v[3]).abs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.circumradius();
        if !(r > 0.0 && r <= 1.0 + 1e-12) {
            return Err(MptError::InvalidArgument(format!("shape circumradius must be in (0, 1], got {r}")));
        }
        match self {
            StarShape::Cylinder { radius, half_height } if !(*radius > 0.0 && *half_height > 0.0) => {
                Err(MptError::InvalidArgument("cylinder dimensions must be positive".into()))
            }
            StarShape::Tetrahedron { vertices } => {
                if Self::planes(vertices).iter().any(|(_, d)| !(*d > 1e-9)) {
                    return Err(MptError::InvalidArgument("origin must lie strictly inside the tetrahedron".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarMeshOptions {
    /// Cells from the centre to the object surface along each index axis.
    pub core_divisions: usize,
    /// Layer thickness growth ratio in the exterior.
    pub growth: f64,
    /// Truncation cube half-width in units of the object diameter.
    pub truncation_factor: f64,
}

impl Default for StarMeshOptions {
    fn default() -> Self {
        Self { core_divisions: 5, growth: 1.8, truncation_factor: 100.0 }
    }
}

/// Exterior layer distances d_0 = 1 < d_1 < … < d_L = half_width, growing geometrically
/// from a first layer of thickness `first`.
fn layer_distances(first: f64, growth: f64, half_width: f64) -> Vec<f64> {
    let span = half_width - 1.0;
    let reach = |g: f64, l: usize| {
        if (g - 1.0).abs() < 1e-12 {
            first * l as f64
        } else {
            first * (g.powi(l as i32) - 1.0) / (g - 1.0)
        }
    };
    let mut layers = 1;
    while reach(growth, layers) < span {
        layers += 1;
    }
    let mut d: Vec<f64> = if reach(1.0, layers) >= span {
        (0..=layers).map(|l| 1.0 + span * l as f64 / layers as f64).collect()
    } else {
        let (mut lo, mut hi) = (1.0, growth);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if reach(mid, layers) < span {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0..=layers).map(|l| 1.0 + reach(hi, l)).collect()
    };
    d[layers] = half_width;
    d
}

/// O-grid mesh of a star-shaped unit object (region 1) in a truncation cube (region 0).
pub fn generate_star_mesh(shape: &StarShape, opts: &StarMeshOptions) -> Result<TetMesh> {
    shape.validate()?;
    check_truncation(opts.truncation_factor)?;
    if opts.core_divisions == 0 || !(opts.growth >= 1.0) {
        return Err(MptError::InvalidArgument("core divisions must be >= 1 and growth >= 1".into()));
    }
    let c = opts.core_divisions as i64;
    let half = opts.truncation_factor * shape.diameter();
    let d = layer_distances(1.0 / c as f64, opts.growth, half);
    let layers = (d.len() - 1) as i64;
    let n = c + layers;
    let side = (2 * n) as usize;
    let aspect = shape.aspect();

    let mut nodes = Vec::with_capacity((side + 1).pow(3));
    let mut index_pos = Vec::with_capacity((side + 1).pow(3));
    for k in -n..=n {
        for j in -n..=n {
            for i in -n..=n {
                let p = [i as f64, j as f64, k as f64];
                index_pos.push(p);
                let s = i.abs().max(j.abs()).max(k.abs());
                if s == 0 {
                    nodes.push([0.0; 3]);
                    continue;
                }
                let q = [p[0] * aspect[0], p[1] * aspect[1], p[2] * aspect[2]];
                let u = scale3(&q, 1.0 / norm3(&q));
                let surface = scale3(&u, shape.radius(&u));
                let x = if s <= c {
                    scale3(&surface, s as f64 / c as f64)
                } else {
                    // Blend from the shape surface to the cube shell p/s.
                    let l = (s - c) as usize;
                    let w = (d[l] - 1.0) / (half - 1.0);
                    scale3(&add3(&scale3(&surface, 1.0 - w), &scale3(&p, w / s as f64)), d[l])
                };
                nodes.push(x);
            }
        }
    }
    let id = |i: usize, j: usize, k: usize| (k * (side + 1) + j) * (side + 1) + i;
    let kuhn = kuhn_tets();
    let mut tets = Vec::with_capacity(side.pow(3) * 6);
    let mut tags = Vec::with_capacity(side.pow(3) * 6);
    for k in 0..side {
        for j in 0..side {
            for i in 0..side {
                // Mirror the Kuhn split per octant so every tet joins the corner
                // nearest the centre to the farthest one and spans two shells.
                let flip = [i, j, k].iter().enumerate().fold(0, |f, (a, &v)| if (v as i64) < n { f | (1 << a) } else { f });
                let corner = |m: usize| {
                    let m = m ^ flip;
                    id(i + (m & 1), j + ((m >> 1) & 1), k + ((m >> 2) & 1))
                };
                let inside = [i, j, k].iter().all(|&a| {
                    let lo = a as i64 - n;
                    lo >= -c && lo + 1 <= c
                });
                for kt in &kuhn {
                    let mut t = [corner(kt[0]), corner(kt[1]), corner(kt[2]), corner(kt[3])];
                    let iv = signed_volume(&index_pos[t[0]], &index_pos[t[1]], &index_pos[t[2]], &index_pos[t[3]]);
                    if iv < 0.0 {
                        t.swap(1, 2);
                    }
                    tets.push(t);
                    tags.push(u32::from(inside));
                }
            }
        }
    }
    TetMesh::new(nodes, tets, tags)
}

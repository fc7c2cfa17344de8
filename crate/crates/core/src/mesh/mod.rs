//! Tagged tetrahedral meshes: tag 0 is free space, tags ≥ 1 are object regions.

mod generate;
mod io;
mod quality;

use std::collections::HashMap;

pub use generate::{generate_box_scene, generate_star_mesh, BoxMeshOptions, BoxRegion, StarMeshOptions, StarShape, MIN_TRUNCATION_FACTOR};
pub use io::{load_mesh, load_mesh_with, parse_msh, save_mesh_json, LoadOptions, MeshJson};
pub use quality::{mesh_quality, MeshQuality};

use crate::error::{MptError, Result};
use crate::model::Surface;
use crate::tensor::{cross3, dot3, sub3, Mat3, Vec3};

/// Local edge `e` of a tet joins local vertices `LOCAL_EDGES[e]`.
pub const LOCAL_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

#[derive(Clone, Debug)]
pub struct TetMesh {
    pub nodes: Vec<Vec3>,
    pub tets: Vec<[usize; 4]>,
    pub tags: Vec<u32>,
    /// Unique edges as (low, high) node pairs, sorted lexicographically.
    pub edges: Vec<[usize; 2]>,
    /// Global edge index of each local edge.
    pub tet_edges: Vec<[usize; 6]>,
    /// +1 when the local edge direction matches the global low→high direction.
    pub tet_signs: Vec<[f64; 6]>,
    /// Faces belonging to exactly one tet.
    pub boundary_faces: Vec<[usize; 3]>,
    pub boundary_edge: Vec<bool>,
}

pub fn signed_volume(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    dot3(&sub3(b, a), &cross3(&sub3(c, a), &sub3(d, a))) / 6.0
}

fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

impl TetMesh {
    /// Builds a mesh, deriving edges and boundary faces. Every tet must have
    /// positive signed volume.
    pub fn new(nodes: Vec<Vec3>, tets: Vec<[usize; 4]>, tags: Vec<u32>) -> Result<Self> {
        if tets.is_empty() {
            return Err(MptError::Mesh("mesh has no tetrahedra".into()));
        }
        if tags.len() != tets.len() {
            return Err(MptError::Mesh(format!("{} tags for {} tets", tags.len(), tets.len())));
        }
        for (i, t) in tets.iter().enumerate() {
            if t.iter().any(|&n| n >= nodes.len()) {
                return Err(MptError::Mesh(format!("tet {i} references a missing node")));
            }
            let v = signed_volume(&nodes[t[0]], &nodes[t[1]], &nodes[t[2]], &nodes[t[3]]);
            if !(v > 0.0) {
                return Err(MptError::InvertedTet { index: i, volume: v });
            }
        }

        let mut pairs: Vec<[usize; 2]> = Vec::with_capacity(tets.len() * 6);
        for t in &tets {
            for [a, b] in LOCAL_EDGES {
                let (p, q) = (t[a], t[b]);
                pairs.push(if p < q { [p, q] } else { [q, p] });
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let edges = pairs;

        let mut tet_edges = Vec::with_capacity(tets.len());
        let mut tet_signs = Vec::with_capacity(tets.len());
        for t in &tets {
            let mut ids = [0; 6];
            let mut signs = [0.0; 6];
            for (e, [a, b]) in LOCAL_EDGES.iter().enumerate() {
                let (p, q) = (t[*a], t[*b]);
                let key = if p < q { [p, q] } else { [q, p] };
                ids[e] = edges.binary_search(&key).expect("edge list built from the same tets");
                signs[e] = if p < q { 1.0 } else { -1.0 };
            }
            tet_edges.push(ids);
            tet_signs.push(signs);
        }

        let mut face_count: HashMap<[usize; 3], (u32, [usize; 3])> = HashMap::with_capacity(tets.len() * 2);
        for t in &tets {
            for f in LOCAL_FACES {
                let face = [t[f[0]], t[f[1]], t[f[2]]];
                face_count.entry(sorted3(face)).and_modify(|e| e.0 += 1).or_insert((1, face));
            }
        }
        let mut boundary_faces: Vec<[usize; 3]> =
            face_count.into_iter().filter(|(_, (c, _))| *c == 1).map(|(k, _)| k).collect();
        boundary_faces.sort_unstable();

        let mut boundary_edge = vec![false; edges.len()];
        for f in &boundary_faces {
            for (a, b) in [(f[0], f[1]), (f[0], f[2]), (f[1], f[2])] {
                let key = if a < b { [a, b] } else { [b, a] };
                let e = edges.binary_search(&key).expect("face edge exists");
                boundary_edge[e] = true;
            }
        }

        Ok(Self { nodes, tets, tags, edges, tet_edges, tet_signs, boundary_faces, boundary_edge })
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        let v = &self.tets[t];
        signed_volume(&self.nodes[v[0]], &self.nodes[v[1]], &self.nodes[v[2]], &self.nodes[v[3]])
    }

    pub fn tet_vertices(&self, t: usize) -> [Vec3; 4] {
        let v = &self.tets[t];
        [self.nodes[v[0]], self.nodes[v[1]], self.nodes[v[2]], self.nodes[v[3]]]
    }

    /// Sorted list of distinct region tags.
    pub fn region_tags(&self) -> Vec<u32> {
        let mut t = self.tags.clone();
        t.sort_unstable();
        t.dedup();
        t
    }

    /// Number of object regions, assuming tags 1..=n are used.
    pub fn max_tag(&self) -> u32 {
        self.tags.iter().copied().max().unwrap_or(0)
    }

    pub fn region_volume(&self, tag: u32) -> Result<f64> {
        if !self.tags.contains(&tag) {
            return Err(MptError::InvalidArgument(format!("region tag {tag} not present in mesh")));
        }
        Ok(self.tets.iter().enumerate().filter(|(i, _)| self.tags[*i] == tag).map(|(i, _)| self.tet_volume(i).abs()).sum())
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_tets()).map(|i| self.tet_volume(i)).sum()
    }

    /// Volume centroid of all object regions (tags ≥ 1).
    pub fn object_centroid(&self) -> Vec3 {
        let mut acc = [0.0; 3];
        let mut vol = 0.0;
        for (i, v) in self.tets.iter().enumerate() {
            if self.tags[i] == 0 {
                continue;
            }
            let w = self.tet_volume(i);
            for k in 0..3 {
                acc[k] += w * (self.nodes[v[0]][k] + self.nodes[v[1]][k] + self.nodes[v[2]][k] + self.nodes[v[3]][k]) / 4.0;
            }
            vol += w;
        }
        [acc[0] / vol, acc[1] / vol, acc[2] / vol]
    }

    /// Outer surface of the union of object regions, oriented outward.
    pub fn object_surface(&self) -> Surface {
        let mut faces: HashMap<[usize; 3], (u32, [usize; 3])> = HashMap::new();
        for (i, t) in self.tets.iter().enumerate() {
            if self.tags[i] == 0 {
                continue;
            }
            for (opp, f) in LOCAL_FACES.iter().enumerate() {
                let mut face = [t[f[0]], t[f[1]], t[f[2]]];
                let n = cross3(&sub3(&self.nodes[face[1]], &self.nodes[face[0]]), &sub3(&self.nodes[face[2]], &self.nodes[face[0]]));
                if dot3(&n, &sub3(&self.nodes[t[opp]], &self.nodes[face[0]])) > 0.0 {
                    face.swap(1, 2);
                }
                faces.entry(sorted3(face)).and_modify(|e| e.0 += 1).or_insert((1, face));
            }
        }
        let mut tris: Vec<[usize; 3]> = faces.into_values().filter(|(c, _)| *c == 1).map(|(_, f)| f).collect();
        tris.sort_unstable();
        let mut map = HashMap::new();
        let mut vertices = Vec::new();
        for t in tris.iter_mut() {
            for n in t.iter_mut() {
                *n = *map.entry(*n).or_insert_with(|| {
                    vertices.push(self.nodes[*n]);
                    vertices.len() - 1
                });
            }
        }
        Surface { vertices, triangles: tris }
    }

    /// Same tetrahedralization with nodes mapped by `x ↦ R x + b`. Orientation
    /// is restored for reflections.
    pub fn transformed(&self, r: &Mat3, b: &Vec3) -> Result<Self> {
        let nodes = self
            .nodes
            .iter()
            .map(|x| {
                let y = crate::tensor::mat_vec(r, x);
                [y[0] + b[0], y[1] + b[1], y[2] + b[2]]
            })
            .collect();
        let tets = if crate::tensor::det3(r) < 0.0 {
            self.tets.iter().map(|t| [t[0], t[2], t[1], t[3]]).collect()
        } else {
            self.tets.clone()
        };
        TetMesh::new(nodes, tets, self.tags.clone())
    }

    pub fn translated(&self, b: &Vec3) -> Result<Self> {
        self.transformed(&crate::tensor::IDENTITY3, b)
    }

    /// Edges not on the truncation boundary, in increasing order.
    pub fn interior_edges(&self) -> Vec<usize> {
        (0..self.n_edges()).filter(|&e| !self.boundary_edge[e]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_tet() -> TetMesh {
        TetMesh::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], vec![[0, 1, 2, 3]], vec![1]).unwrap()
    }

    #[test]
    fn single_tet_combinatorics() {
        let m = unit_tet();
        assert_eq!(m.n_edges(), 6);
        assert_eq!(m.boundary_faces.len(), 4);
        assert!(m.boundary_edge.iter().all(|&b| b));
        assert!((m.region_volume(1).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(m.region_volume(0).is_err());
    }

    #[test]
    fn inverted_tet_is_named() {
        let err = TetMesh::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], vec![[0, 2, 1, 3]], vec![1])
            .unwrap_err();
        assert!(matches!(err, MptError::InvertedTet { index: 0, .. }));
    }

    #[test]
    fn object_surface_is_outward() {
        let s = unit_tet().object_surface();
        assert_eq!(s.triangles.len(), 4);
        assert!(s.contains(&[0.1, 0.1, 0.1]));
        assert!(!s.contains(&[1.0, 1.0, 1.0]));
    }
}

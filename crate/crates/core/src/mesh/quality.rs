use rayon::prelude::*;
use serde::Serialize;

use super::{TetMesh, LOCAL_EDGES};
use crate::error::{MptError, Result};
use crate::tensor::{cross3, dot3, norm3, sub3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeshQuality {
    /// Degrees.
    pub min_dihedral: f64,
    pub max_dihedral: f64,
    pub min_edge: f64,
    pub max_edge: f64,
    pub tet_count: usize,
    pub edge_count: usize,
}

/// Dihedral angles (radians) at the six edges of a tet.
pub fn dihedral_angles(v: &[[f64; 3]; 4]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (e, [a, b]) in LOCAL_EDGES.iter().enumerate() {
        let others: Vec<usize> = (0..4).filter(|k| k != a && k != b).collect();
        let axis = sub3(&v[*b], &v[*a]);
        let n1 = cross3(&axis, &sub3(&v[others[0]], &v[*a]));
        let n2 = cross3(&axis, &sub3(&v[others[1]], &v[*a]));
        let c = dot3(&n1, &n2) / (norm3(&n1) * norm3(&n2));
        out[e] = c.clamp(-1.0, 1.0).acos();
    }
    out
}

pub fn mesh_quality(mesh: &TetMesh) -> Result<MeshQuality> {
    if mesh.tets.is_empty() {
        return Err(MptError::Mesh("empty mesh".into()));
    }
    let (min_d, max_d) = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let d = dihedral_angles(&mesh.tet_vertices(t));
            d.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
        })
        .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    let (min_e, max_e) = mesh
        .edges
        .par_iter()
        .map(|[a, b]| norm3(&sub3(&mesh.nodes[*b], &mesh.nodes[*a])))
        .fold(|| (f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
        .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    Ok(MeshQuality {
        min_dihedral: min_d.to_degrees(),
        max_dihedral: max_d.to_degrees(),
        min_edge: min_e,
        max_edge: max_e,
        tet_count: mesh.n_tets(),
        edge_count: mesh.n_edges(),
    })
}

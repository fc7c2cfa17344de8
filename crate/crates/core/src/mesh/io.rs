//! Mesh files: the native JSON schema and an ASCII subset of Gmsh MSH 2.2.
//!
//! Native JSON: `{"nodes": [[x, y, z], ...], "tets": [[i, j, k, l, tag], ...]}`
//! with 0-based node indices. MSH 2.2: `$Nodes` and `$Elements` blocks,
//! element type 4 only, first element tag is the region (0 = free space).

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TetMesh;
use crate::error::{MptError, Result};
use crate::tensor::Vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshJson {
    pub nodes: Vec<Vec3>,
    pub tets: Vec<[u64; 5]>,
}

impl From<&TetMesh> for MeshJson {
    fn from(m: &TetMesh) -> Self {
        let tets = m
            .tets
            .iter()
            .zip(&m.tags)
            .map(|(t, &g)| [t[0] as u64, t[1] as u64, t[2] as u64, t[3] as u64, g as u64])
            .collect();
        Self { nodes: m.nodes.clone(), tets }
    }
}

impl MeshJson {
    pub fn into_mesh(self) -> Result<TetMesh> {
        let n = self.nodes.len() as u64;
        let mut tets = Vec::with_capacity(self.tets.len());
        let mut tags = Vec::with_capacity(self.tets.len());
        for (i, t) in self.tets.iter().enumerate() {
            if t[..4].iter().any(|&v| v >= n) {
                return Err(MptError::Mesh(format!("tet {i} references node outside 0..{n}")));
            }
            let tag = u32::try_from(t[4]).map_err(|_| MptError::Mesh(format!("tet {i}: region tag too large")))?;
            tets.push([t[0] as usize, t[1] as usize, t[2] as usize, t[3] as usize]);
            tags.push(tag);
        }
        TetMesh::new(self.nodes, tets, tags)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LoadOptions {
    /// Reject meshes without free-space (tag 0) tets.
    pub require_exterior: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { require_exterior: true }
    }
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<TetMesh> {
    load_mesh_with(path, LoadOptions::default())
}

pub fn load_mesh_with(path: impl AsRef<Path>, opts: LoadOptions) -> Result<TetMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MptError::io(path, e))?;
    let mesh = if text.trim_start().starts_with('{') {
        serde_json::from_str::<MeshJson>(&text)?.into_mesh()?
    } else {
        parse_msh(&text)?
    };
    if opts.require_exterior && !mesh.tags.contains(&0) {
        return Err(MptError::Mesh("mesh has no free-space region (tag 0)".into()));
    }
    Ok(mesh)
}

pub fn save_mesh_json(mesh: &TetMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(&MeshJson::from(mesh))?;
    std::fs::write(path, text).map_err(|e| MptError::io(path, e))
}

fn section<'a>(text: &'a str, name: &str) -> Result<Vec<&'a str>> {
    let start = format!("${name}");
    let end = format!("$End{name}");
    let mut lines = text.lines().map(str::trim);
    if !lines.any(|l| l == start) {
        return Err(MptError::Mesh(format!("missing ${name} block")));
    }
    let body: Vec<&str> = lines.by_ref().take_while(|l| *l != end).filter(|l| !l.is_empty()).collect();
    Ok(body)
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| MptError::Mesh(format!("malformed {what}")))
}

/// Parses the ASCII MSH 2.2 subset.
pub fn parse_msh(text: &str) -> Result<TetMesh> {
    if let Ok(fmt) = section(text, "MeshFormat") {
        let version: f64 = parse_num(fmt.first().and_then(|l| l.split_whitespace().next()), "mesh format")?;
        let file_type: u32 = parse_num(fmt.first().and_then(|l| l.split_whitespace().nth(1)), "mesh format")?;
        if !(2.0..3.0).contains(&version) || file_type != 0 {
            return Err(MptError::Mesh(format!("only ASCII MSH 2.x is supported (got version {version}, type {file_type})")));
        }
    }
    let node_lines = section(text, "Nodes")?;
    let count: usize = parse_num(node_lines.first().copied(), "node count")?;
    if node_lines.len() != count + 1 {
        return Err(MptError::Mesh(format!("expected {count} nodes, found {}", node_lines.len().saturating_sub(1))));
    }
    let mut index = HashMap::with_capacity(count);
    let mut nodes = Vec::with_capacity(count);
    for line in &node_lines[1..] {
        let mut it = line.split_whitespace();
        let id: u64 = parse_num(it.next(), "node id")?;
        let x = [parse_num(it.next(), "node x")?, parse_num(it.next(), "node y")?, parse_num(it.next(), "node z")?];
        index.insert(id, nodes.len());
        nodes.push(x);
    }
    let elem_lines = section(text, "Elements")?;
    let count: usize = parse_num(elem_lines.first().copied(), "element count")?;
    if elem_lines.len() != count + 1 {
        return Err(MptError::Mesh(format!("expected {count} elements, found {}", elem_lines.len().saturating_sub(1))));
    }
    let mut tets = Vec::with_capacity(count);
    let mut tags = Vec::with_capacity(count);
    for line in &elem_lines[1..] {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let id: u64 = parse_num(fields.first().copied(), "element id")?;
        let ty: u32 = parse_num(fields.get(1).copied(), "element type")?;
        if ty != 4 {
            return Err(MptError::Mesh(format!("element {id}: unsupported element type {ty} (only 4-node tets)")));
        }
        let ntags: usize = parse_num(fields.get(2).copied(), "tag count")?;
        if ntags == 0 {
            return Err(MptError::Mesh(format!("element {id}: missing region tag")));
        }
        let tag: u32 = parse_num(fields.get(3).copied(), "region tag")?;
        let mut t = [0usize; 4];
        for (k, slot) in t.iter_mut().enumerate() {
            let nid: u64 = parse_num(fields.get(3 + ntags + k).copied(), "element node")?;
            *slot = *index.get(&nid).ok_or_else(|| MptError::Mesh(format!("element {id}: unknown node {nid}")))?;
        }
        tets.push(t);
        tags.push(tag);
    }
    TetMesh::new(nodes, tets, tags)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_TET: &str = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n$EndNodes\n$Elements\n1\n1 4 2 1 1 1 2 3 4\n$EndElements\n";

    #[test]
    fn one_tet_msh() {
        let m = parse_msh(ONE_TET).unwrap();
        assert_eq!(m.nodes.len(), 4);
        assert_eq!(m.n_edges(), 6);
        assert_eq!(m.tags, vec![1]);
    }

    #[test]
    fn negative_volume_is_an_error() {
        let bad = ONE_TET.replace("1 4 2 1 1 1 2 3 4", "1 4 2 1 1 1 3 2 4");
        assert!(matches!(parse_msh(&bad), Err(MptError::InvertedTet { index: 0, .. })));
    }

    #[test]
    fn unknown_element_type_is_an_error() {
        let bad = ONE_TET.replace("1 4 2 1 1 1 2 3 4", "1 2 2 1 1 1 2 3");
        assert!(parse_msh(&bad).is_err());
    }
}

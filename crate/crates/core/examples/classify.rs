//! Builds a small dictionary (sphere, coin, tetrahedron) and classifies a
//! rotated, noisy coin from its tensors.

use std::sync::Arc;

use mptk::fem::SolverOptions;
use mptk::inverse::{dictionary_build, dictionary_match, Candidate};
use mptk::mesh::{generate_star_mesh, StarMeshOptions, StarShape};
use mptk::tensor::rotation_about;
use mptk::Material;

fn main() -> mptk::Result<()> {
    let opts = StarMeshOptions { core_divisions: 2, growth: 2.0, truncation_factor: 10.0 };
    let (coin, _) = StarShape::coin(0.01125, 3.15e-3);
    let shapes = [("sphere", StarShape::Sphere), ("coin", coin), ("tetrahedron", StarShape::regular_tetrahedron())];
    let candidates = shapes
        .into_iter()
        .map(|(name, s)| {
            Ok(Candidate { name: name.into(), mesh: Arc::new(generate_star_mesh(&s, &opts)?), materials: vec![Material::new(1.59e7, 1.0)?], alpha: 0.01 })
        })
        .collect::<mptk::Result<Vec<_>>>()?;
    let freqs = [1e2, 1e3, 1e4, 1e5, 1e6];
    let (dict, records) = dictionary_build(&candidates, &freqs, &SolverOptions::default())?;
    let rot = rotation_about([1.0, 1.0, 0.0], 0.6);
    let target: Vec<_> = records[1].iter().map(|r| r.m.rotated(&rot)).collect::<mptk::Result<_>>()?;
    for m in dictionary_match(&target, &freqs, &dict)? {
        println!("{:>12}  distance {:.3e}", m.name, m.distance);
    }
    Ok(())
}

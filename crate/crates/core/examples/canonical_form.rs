//! Canonical placement and size of a coin, independent of where it was meshed.

use mptk::mesh::{generate_star_mesh, StarMeshOptions, StarShape};
use mptk::mpt::{canonicalize, CanonicalOptions};
use mptk::Material;

fn main() -> mptk::Result<()> {
    let (coin, _) = StarShape::coin(0.01125, 3.15e-3);
    let mesh = generate_star_mesh(&coin, &StarMeshOptions { core_divisions: 2, growth: 2.0, truncation_factor: 10.0 })?;
    let materials = [Material::new(1.59e7, 1.0)?];
    let opts = CanonicalOptions::default();
    let a = canonicalize(&mesh, &materials, &opts)?;
    let b = canonicalize(&mesh.translated(&[0.3, -0.2, 0.1])?, &materials, &opts)?;
    println!("normalization {:?}, fallback {}", a.normalization, a.fallback);
    println!("canonical alpha {:.6} vs {:.6} after translation", a.alpha, b.alpha);
    println!("centre found at {:.3?}", b.centre);
    Ok(())
}

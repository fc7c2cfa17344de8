//! FEM tensor of a conducting sphere compared with the closed-form result.
//!
//! `cargo run --release --example sphere_mpt -- [core_divisions]`

use std::sync::Arc;

use mptk::mesh::{generate_star_mesh, StarMeshOptions, StarShape};
use mptk::mpt::{sphere_polarizability, MptSolver};
use mptk::Material;

fn main() -> mptk::Result<()> {
    let c = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let mesh = generate_star_mesh(&StarShape::Sphere, &StarMeshOptions { core_divisions: c, growth: 2.0, truncation_factor: 10.0 })?;
    println!("{} tets, {} edges", mesh.n_tets(), mesh.n_edges());
    let (alpha, sigma) = (0.01, 5.96e7);
    let solver = MptSolver::new(Arc::new(mesh), vec![Material::new(sigma, 1.0)?], alpha)?;
    for f in [1e1, 1e3, 1e5] {
        let (rec, diag) = solver.at_frequency(f)?;
        let exact = sphere_polarizability(alpha, sigma, 1.0, 2.0 * std::f64::consts::PI * f)?;
        let fem = rec.m.get(0, 0);
        println!(
            "f = {f:>8.0e} Hz  fem {:.4e}  exact {:.4e}  rel err {:.2}%  (residual {:.1e})",
            fem,
            exact,
            100.0 * (fem - exact).norm() / exact.norm(),
            diag.residual
        );
    }
    Ok(())
}

//! Eigenvalue spectra of a two-material parallelepiped and their features:
//! each conductivity contributes one maximum in λ(ℐ).

use std::sync::Arc;

use mptk::mesh::{generate_box_scene, BoxMeshOptions, BoxRegion};
use mptk::mpt::{count_spectral_features, MptSolver};
use mptk::Material;

fn main() -> mptk::Result<()> {
    let boxes = [
        BoxRegion { min: [-1.0, -0.5, -0.5], max: [0.0, 0.5, 0.5], tag: 1 },
        BoxRegion { min: [0.0, -0.5, -0.5], max: [1.0, 0.5, 0.5], tag: 2 },
    ];
    let mesh = generate_box_scene(&boxes, &BoxMeshOptions { truncation_factor: 10.0, h: 0.25, growth: 2.0 })?;
    let materials = vec![Material::new(1e6, 1.0)?, Material::new(1e8, 1.0)?];
    let solver = MptSolver::new(Arc::new(mesh), materials, 0.01)?;
    let freqs: Vec<f64> = (0..25).map(|k| 10f64.powf(7.0 * k as f64 / 24.0)).collect();
    let (sig, _) = solver.sweep_spectra(&freqs)?;
    println!("{:>10} {:>12} {:>12}", "f [Hz]", "lamR1", "lamI1");
    for (f, (r, i)) in sig.frequencies.iter().zip(sig.lambda_r.iter().zip(&sig.lambda_i)) {
        println!("{f:>10.3e} {:>12.4e} {:>12.4e}", r[0], i[0]);
    }
    let counts = count_spectral_features(&sig)?;
    println!("maxima {:?}, inflections {:?}", counts.maxima, counts.inflections);
    Ok(())
}

//! Perturbed field of two spheres under a coil excitation.

use mptk::forward::{field_sweep, BackgroundField, DipoleSource, ObjectResponse};
use mptk::mpt::mpt_sphere_analytic;

fn main() -> mptk::Result<()> {
    let omega = 2.0 * std::f64::consts::PI * 1e4;
    let objects = [
        ObjectResponse { z: [0.0, 0.0, -0.3], alpha: 0.01, mpt: mpt_sphere_analytic(0.01, 5.96e7, 1.0, omega)? },
        ObjectResponse { z: [0.2, 0.0, -0.4], alpha: 0.015, mpt: mpt_sphere_analytic(0.015, 1e6, 50.0, omega)? },
    ];
    let h0 = BackgroundField::Dipole { source: DipoleSource::new([0.0, 0.0, 0.1], [0.0, 0.0, 1.0])? };
    let probes: Vec<[f64; 3]> = (0..9).map(|i| [-0.4 + 0.1 * i as f64, 0.0, 0.0]).collect();
    let h = field_sweep(&objects, &h0, &probes)?;
    for (x, v) in probes.iter().zip(&h) {
        println!("x1 = {:+.2}  (H-H0)_3 = {:.4e}", x[0], v[2]);
    }
    Ok(())
}

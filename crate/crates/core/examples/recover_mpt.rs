//! Recovers the tensors of two objects at known positions by least squares.

use mptk::forward::ObjectResponse;
use mptk::inverse::{add_noise, build_msr, recover_mpts, CoilArray};
use mptk::mpt::mpt_sphere_analytic;

fn main() -> mptk::Result<()> {
    let coils = CoilArray::planar_grid(16, 1.0, 0.0, [0.0, 0.0, 1.0])?;
    let z = [[0.1, 0.1, -0.5], [-0.3, 0.3, -0.5]];
    for f in [1e2, 1e4] {
        let omega = 2.0 * std::f64::consts::PI * f;
        let truth = [mpt_sphere_analytic(0.01, 5.96e7, 1.0, omega)?, mpt_sphere_analytic(0.01, 1e6, 20.0, omega)?];
        let objects: Vec<ObjectResponse> = z.iter().zip(&truth).map(|(z, m)| ObjectResponse { z: *z, alpha: 0.01, mpt: *m }).collect();
        let a = add_noise(&build_msr(&objects, &coils, f)?, 0.01, 1, 1)?;
        let rec = recover_mpts(&[a], &z, &coils)?;
        for (n, m) in truth.iter().enumerate() {
            let err = rec.tensors[n][0].sub(m).norm() / m.norm();
            println!("f = {f:.0e} Hz, object {n}: relative error {err:.2e} (condition {:.1e})", rec.condition);
        }
    }
    Ok(())
}

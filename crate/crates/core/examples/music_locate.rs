//! Locates two spheres from a noisy multistatic response matrix with MUSIC.

use mptk::forward::ObjectResponse;
use mptk::inverse::{add_noise, build_msr, estimate_object_count, find_peaks, music_image, CoilArray, PlaneGrid, MAX_RESIDUAL_FRACTION};
use mptk::mpt::mpt_sphere_analytic;

fn main() -> mptk::Result<()> {
    let f = 1e4;
    let omega = 2.0 * std::f64::consts::PI * f;
    let objects = [
        ObjectResponse { z: [0.1, 0.1, -0.5], alpha: 0.01, mpt: mpt_sphere_analytic(0.01, 5.96e7, 1.0, omega)? },
        ObjectResponse { z: [-0.3, 0.3, -0.5], alpha: 0.01, mpt: mpt_sphere_analytic(0.01, 3.5e7, 1.0, omega)? },
    ];
    let coils = CoilArray::planar_grid(16, 1.0, 0.0, [0.0, 0.0, 1.0])?;
    let a = add_noise(&build_msr(&objects, &coils, f)?, 0.01, 1, 42)?;
    let s = a.singular_values()?;
    let lead: Vec<String> = s[..8].iter().map(|v| format!("{v:.3e}")).collect();
    println!("leading singular values {}", lead.join(" "));
    println!("estimated object count {:?}", estimate_object_count(&a, 10.0)?);
    let grid = PlaneGrid { x_range: [-1.0, 1.0], y_range: [-1.0, 1.0], z: -0.5, spacing: 0.05 };
    let image = music_image(&a, &coils, &grid, 2)?;
    for p in find_peaks(&image, MAX_RESIDUAL_FRACTION) {
        println!("peak at ({:+.2}, {:+.2}, {:+.2})  I = {:.3}", p.z[0], p.z[1], p.z[2], p.value);
    }
    Ok(())
}

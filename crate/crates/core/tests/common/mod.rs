//! Radial finite-difference oracle for the sphere. The azimuthal vector
//! potential A = f(r) sin θ φ̂ of a sphere in a uniform field satisfies
//!
//! ```text
//!   f'' + 2f'/r − 2f/r² + i ν μ_r f = 0   (r < 1),     f = r/2 + c/r²   (r > 1)
//! ```
//!
//! in units of α. Continuity of f and of μ⁻¹(f + r f') at r = 1 fixes c, and
//! the polarizability is m = 4π c α³. The interior problem is solved by
//! second-order finite differences.

use mptk::{Complex64, MU0};

/// g'(1) for the interior solution normalized to g(1) = 1.
fn interior_slope(k2: Complex64, n: usize) -> Complex64 {
    let h = 1.0 / n as f64;
    // Unknowns g_1..g_{n-1}; g_0 = 0, g_n = 1. Thomas algorithm.
    let m = n - 1;
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    let mut c = vec![Complex64::new(0.0, 0.0); m];
    let mut d = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m {
        let r = (i + 1) as f64 * h;
        a[i] = Complex64::new(1.0 / (h * h) - 1.0 / (r * h), 0.0);
        c[i] = Complex64::new(1.0 / (h * h) + 1.0 / (r * h), 0.0);
        b[i] = Complex64::new(-2.0 / (h * h) - 2.0 / (r * r), 0.0) + k2;
    }
    d[m - 1] = -c[m - 1];
    for i in 1..m {
        let w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        let prev = d[i - 1];
        d[i] -= w * prev;
    }
    let mut g = vec![Complex64::new(0.0, 0.0); n + 1];
    g[n] = Complex64::new(1.0, 0.0);
    g[m] = d[m - 1] / b[m - 1];
    for i in (0..m - 1).rev() {
        g[i + 1] = (d[i] - c[i] * g[i + 2]) / b[i];
    }
    (3.0 * g[n] - 4.0 * g[n - 1] + g[n - 2]) / (2.0 * h)
}

pub fn fd_polarizability(alpha: f64, sigma: f64, mu_r: f64, omega: f64, n: usize) -> Complex64 {
    let nu = omega * MU0 * sigma * alpha * alpha;
    let gp = interior_slope(Complex64::new(0.0, nu * mu_r), n);
    let c = (2.0 * mu_r - 1.0 - gp) / (2.0 * (1.0 + gp + mu_r));
    4.0 * std::f64::consts::PI * c * alpha.powi(3)
}

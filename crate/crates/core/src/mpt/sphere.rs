//! Closed-form polarizability of a homogeneous conducting, permeable sphere.
//!
//! With x = kα, k² = iωμ₀μ_rσ (Im x > 0) and t = j₁(x)/j₀(x) = 1/x − cot x,
//! matching A_φ and H_θ at r = α gives
//!
//! ```text
//!   m = 4πα³ (μ_r q − 1)/(μ_r q + 2),   q = 2t/(x − t),
//! ```
//!
//! so that q = 1 at ω = 0 (magnetostatic limit) and q → 0 as ω → ∞.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::model::MU0;
use crate::tensor::ComplexTensor2;

/// 1/x − cot x, using the Laurent series near 0 and a decaying exponential
/// for cot x elsewhere (Im x ≥ 0 keeps |e^{2ix}| ≤ 1).
fn bessel_ratio(x: Complex64) -> Complex64 {
    if x.norm() < 0.1 {
        let x2 = x * x;
        return x * (1.0 / 3.0 + x2 * (1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 / 4725.0)));
    }
    let w = (Complex64::i() * 2.0 * x).exp();
    let cot = Complex64::i() * (w + 1.0) / (w - 1.0);
    x.inv() - cot
}

/// Scalar m with ℳ = m·I.
pub fn sphere_polarizability(alpha: f64, sigma: f64, mu_r: f64, omega: f64) -> Result<Complex64> {
    if !(alpha > 0.0) || !(sigma >= 0.0) || !(mu_r > 0.0) || !(omega >= 0.0) {
        return Err(invalid("sphere oracle needs alpha > 0, sigma >= 0, mu_r > 0, omega >= 0"));
    }
    let x2 = Complex64::new(0.0, omega * MU0 * mu_r * sigma * alpha * alpha);
    let q = if x2.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        let x = x2.sqrt();
        let t = bessel_ratio(x);
        if x.norm() < 0.1 {
            // x − t = x(2/3 − x²/45 − …): divide out x analytically.
            let xx = x * x;
            let tail = 1.0 / 3.0 + xx * (1.0 / 45.0 + xx * (2.0 / 945.0 + xx / 4725.0));
            tail * 2.0 / (Complex64::new(1.0, 0.0) - tail)
        } else {
            t * 2.0 / (x - t)
        }
    };
    let mq = q * mu_r;
    Ok((mq - 1.0) / (mq + 2.0) * (4.0 * std::f64::consts::PI * alpha.powi(3)))
}

pub fn mpt_sphere_analytic(alpha: f64, sigma: f64, mu_r: f64, omega: f64) -> Result<ComplexTensor2> {
    Ok(ComplexTensor2::isotropic(sphere_polarizability(alpha, sigma, mu_r, omega)?))
}

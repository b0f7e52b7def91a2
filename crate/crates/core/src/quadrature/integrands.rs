//! Pointwise integrands in the frequency variable λ.

use num_complex::Complex64;

use crate::params::{BathParameters, Regime, RegimeKind};
use crate::quadrature::ThermalWeight;
use crate::specfun::coth_weight;

/// λ·coth(κλ) or one of its limiting forms.
pub fn thermal_factor(weight: ThermalWeight, lambda: f64, kappa: f64) -> f64 {
    match weight {
        ThermalWeight::HighTemperature => 1.0 / kappa,
        ThermalWeight::ZeroTemperature => lambda,
        ThermalWeight::Exact | ThermalWeight::Auto => coth_weight(lambda, kappa),
    }
}

/// Ohmic spectral factor 4Rλ·coth(κλ)/((λ²−1)² + 4R²λ²).
pub fn spectral_weight(params: &BathParameters, weight: ThermalWeight, lambda: f64) -> f64 {
    let r = params.damping();
    let detuning = (lambda - 1.0) * (lambda + 1.0);
    let denom = detuning * detuning + 4.0 * r * r * lambda * lambda;
    4.0 * r * thermal_factor(weight, lambda, params.kappa()) / denom
}

/// e^z − 1 without cancellation for small |z|.
fn cexpm1(z: Complex64) -> Complex64 {
    let (sin_half, _) = (0.5 * z.im).sin_cos();
    let (sin, cos) = z.im.sin_cos();
    let em1 = z.re.exp_m1();
    Complex64::new(em1 * cos - 2.0 * sin_half * sin_half, z.re.exp() * sin)
}

/// e^{−aθ}·(e^{cθ} − 1)/c.
fn damped_expm1_ratio(c: Complex64, a: f64, theta: f64) -> Complex64 {
    (cexpm1((c - a) * theta) - (-a * theta).exp_m1()) / c
}

/// Time-integrated kernels at one frequency, scaled by e^{−2Rθ}.
///
/// With g₁ = ∫₀^θ s(τ)e^{(R+iλ)τ}dτ and g₃ = ∫₀^θ s(θ−τ)e^{(R+iλ)τ}dτ, where
/// s is sin(S·) or sinh(S·), the unscaled kernels are e^{−2Rθ}|g₁|²,
/// 2e^{−Rθ}Re(g₁ḡ₃) and |g₃|². Every exponential that could overflow is
/// paired with its damping factor before it is formed.
pub fn scaled_time_kernels(regime: Regime, r: f64, lambda: f64, theta: f64) -> [f64; 3] {
    let s = regime.s;
    let b = Complex64::new(r, lambda);
    let (g1, g3) = match regime.kind {
        RegimeKind::Overdamped => {
            let g1 = 0.5
                * (damped_expm1_ratio(b + s, 2.0 * r, theta)
                    - damped_expm1_ratio(b - s, 2.0 * r, theta));
            let g3 = 0.5
                * (damped_expm1_ratio(b - s, r - s, theta)
                    - damped_expm1_ratio(b + s, r + s, theta));
            (g1, g3)
        }
        _ => {
            let is = Complex64::new(0.0, s);
            let half_i = Complex64::new(0.0, 2.0);
            let g1 = (damped_expm1_ratio(b + is, 2.0 * r, theta)
                - damped_expm1_ratio(b - is, 2.0 * r, theta))
                / half_i;
            let phase = Complex64::from_polar(1.0, s * theta);
            let g3 = (phase * damped_expm1_ratio(b - is, r, theta)
                - phase.conj() * damped_expm1_ratio(b + is, r, theta))
                / half_i;
            (g1, g3)
        }
    };
    [
        g1.norm_sqr(),
        2.0 * (g1 * g3.conj()).re,
        g3.norm_sqr(),
    ]
}

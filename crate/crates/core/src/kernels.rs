//! Closed forms for I(θ) and the exponent coefficients of the reduced
//! density matrix.
//!
//! The coefficients are evaluated in a form scaled by u = e^{−Rθ}: with
//! ŝ = u·sin(Sθ), ĉ = u·cos(Sθ), K̂ = u·K and Â = u²·A, every term stays of
//! order one in the overdamped regime, where sinh and A⁽³⁾ grow
//! exponentially. For overdamped motion sin and cos read sinh and cosh.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{BathParameters, InitialState, Regime, RegimeKind};
use crate::quadrature::{
    integrate_a_direct_scaled, integrate_moments, second_derivative_i_at_zero, KernelMethod,
    KernelSample, Moments, QuadratureConfig, ThermalWeight, ZERO_T_PROXY_KAPPA,
};
use crate::specfun::{exp_integral_e1_scaled, exp_integral_ei_scaled};

/// Largest κ accepted by the high-temperature residue forms.
pub const HIGH_T_KAPPA_LIMIT: f64 = 0.1;

/// |sin(Sθ)| below which F is obtained by interpolation.
pub const SINGULAR_WINDOW: f64 = 1e-3;

/// Where the kernel samples I(θ), dI/dθ and d²I/dθ² come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KernelSource {
    /// Adaptive quadrature of the frequency integral.
    Quadrature(QuadratureConfig),
    /// High-temperature residue closed forms (κ ≤ 0.1).
    Residue,
    /// Zero-temperature strong-damping closed form (overdamped, κ ≥ 50).
    /// The configuration supplies the cutoff-regularized d²I/dθ²|₀.
    Appendix(QuadratureConfig),
}

impl Default for KernelSource {
    fn default() -> Self {
        KernelSource::Quadrature(QuadratureConfig::default())
    }
}

impl KernelSource {
    /// Rejects parameter sets outside the validity region of the source.
    pub fn check(&self, params: &BathParameters) -> Result<()> {
        match self {
            KernelSource::Quadrature(cfg) => cfg.validate(),
            KernelSource::Residue => {
                check_high_t(params)?;
                non_critical(params, "residue kernels").map(|_| ())
            }
            KernelSource::Appendix(cfg) => {
                cfg.validate()?;
                check_zero_t(params)
            }
        }
    }

    /// I(0), d²I/dθ²|₀ and the sample at θ.
    pub fn moments(&self, theta: f64, params: &BathParameters) -> Result<Moments> {
        match self {
            KernelSource::Quadrature(cfg) => integrate_moments(theta, params, cfg),
            KernelSource::Residue => {
                let sample = residue_sample(theta, params)?;
                let scale = PI / params.kappa();
                Ok(Moments {
                    theta,
                    i0: scale,
                    d2i0: -scale,
                    i: sample.i,
                    di: sample.di,
                    d2i: sample.d2i,
                    method: sample.method,
                    weight: sample.weight,
                    zero_t_proxy: false,
                })
            }
            KernelSource::Appendix(cfg) => {
                let sample = zero_t_i_strong(theta, params)?;
                let d2i0 = second_derivative_i_at_zero(params, &cfg.with_weight(ThermalWeight::ZeroTemperature))?;
                Ok(Moments {
                    theta,
                    i0: zero_t_origin_value(params)?,
                    d2i0,
                    i: sample.i,
                    di: sample.di,
                    d2i: sample.d2i,
                    method: sample.method,
                    weight: sample.weight,
                    zero_t_proxy: true,
                })
            }
        }
    }

    pub fn method(&self, params: &BathParameters) -> KernelMethod {
        match self {
            KernelSource::Quadrature(_) => KernelMethod::DirectQuadrature,
            KernelSource::Residue if params.regime().is_overdamped() => {
                KernelMethod::ResidueOverdampedHighT
            }
            KernelSource::Residue => KernelMethod::ResidueHighT,
            KernelSource::Appendix(_) => KernelMethod::ZeroTAppendix,
        }
    }
}

fn non_critical(params: &BathParameters, operation: &'static str) -> Result<Regime> {
    let regime = params.regime();
    if regime.kind == RegimeKind::Critical {
        Err(Error::CriticalDamping {
            operation,
            damping: params.damping(),
        })
    } else {
        Ok(regime)
    }
}

fn check_high_t(params: &BathParameters) -> Result<()> {
    if params.kappa() <= HIGH_T_KAPPA_LIMIT {
        Ok(())
    } else {
        Err(Error::RegimeGate {
            operation: "high-temperature residue form",
            reason: format!("kappa = {} exceeds {}", params.kappa(), HIGH_T_KAPPA_LIMIT),
        })
    }
}

fn check_zero_t(params: &BathParameters) -> Result<()> {
    if !params.regime().is_overdamped() {
        return Err(Error::RegimeGate {
            operation: "zero-temperature strong-damping form",
            reason: format!("R = {} is not overdamped", params.damping()),
        });
    }
    if params.kappa() < ZERO_T_PROXY_KAPPA {
        return Err(Error::RegimeGate {
            operation: "zero-temperature strong-damping form",
            reason: format!("kappa = {} is below {}", params.kappa(), ZERO_T_PROXY_KAPPA),
        });
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if theta >= 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "theta",
            value: theta,
            reason: "must be finite and non-negative",
        })
    }
}

/// sin/cos (or sinh/cosh) of Sθ together with their e^{−Rθ}-scaled forms.
#[derive(Debug, Clone, Copy)]
struct Phase {
    u: f64,
    sin: f64,
    cos: f64,
    sin_hat: f64,
    cos_hat: f64,
}

impl Phase {
    fn new(regime: Regime, r: f64, theta: f64) -> Self {
        let s = regime.s;
        let u = (-r * theta).exp();
        match regime.kind {
            RegimeKind::Overdamped => {
                let x = s * theta;
                let (sin, cos) = (x.sinh(), x.cosh());
                let (sin_hat, cos_hat) = if x < 20.0 {
                    (u * sin, u * cos)
                } else {
                    // R − S = 1/(R + S) avoids cancellation for large R.
                    let slow = (-theta / (r + s)).exp();
                    let fast = (-(r + s) * theta).exp();
                    (0.5 * (slow - fast), 0.5 * (slow + fast))
                };
                Phase {
                    u,
                    sin,
                    cos,
                    sin_hat,
                    cos_hat,
                }
            }
            _ => {
                let (sin, cos) = (s * theta).sin_cos();
                Phase {
                    u,
                    sin,
                    cos,
                    sin_hat: u * sin,
                    cos_hat: u * cos,
                }
            }
        }
    }
}

/// I(θ) = (π/κS)e^{−Rθ}[S cos(Sθ) + R sin(Sθ)] and its derivatives.
pub fn residue_i_high_t(theta: f64, params: &BathParameters) -> Result<KernelSample> {
    check_theta(theta)?;
    check_high_t(params)?;
    let regime = params.regime();
    if !regime.is_underdamped() {
        return Err(Error::RegimeGate {
            operation: "high-temperature residue form",
            reason: format!("R = {} is not underdamped", params.damping()),
        });
    }
    Ok(residue_from_phase(theta, params, regime, KernelMethod::ResidueHighT))
}

/// I(θ) = (π/κS)e^{−Rθ}[S cosh(Sθ) + R sinh(Sθ)] and its derivatives.
pub fn residue_i_overdamped_high_t(theta: f64, params: &BathParameters) -> Result<KernelSample> {
    check_theta(theta)?;
    check_high_t(params)?;
    let regime = params.regime();
    if !regime.is_overdamped() {
        return Err(Error::RegimeGate {
            operation: "overdamped high-temperature residue form",
            reason: format!("R = {} is not overdamped", params.damping()),
        });
    }
    Ok(residue_from_phase(
        theta,
        params,
        regime,
        KernelMethod::ResidueOverdampedHighT,
    ))
}

fn residue_from_phase(theta: f64, params: &BathParameters, regime: Regime, method: KernelMethod) -> KernelSample {
    let r = params.damping();
    let s = regime.s;
    let ph = Phase::new(regime, r, theta);
    let scale = PI / (params.kappa() * s);
    KernelSample {
        theta,
        i: scale * (s * ph.cos_hat + r * ph.sin_hat),
        di: -scale * ph.sin_hat,
        d2i: scale * (r * ph.sin_hat - s * ph.cos_hat),
        method,
        weight: ThermalWeight::HighTemperature,
        zero_t_proxy: false,
    }
}

fn residue_sample(theta: f64, params: &BathParameters) -> Result<KernelSample> {
    if params.regime().is_overdamped() {
        residue_i_overdamped_high_t(theta, params)
    } else {
        residue_i_high_t(theta, params)
    }
}

/// Pole positions 1/(2R) and 2R of the strongly overdamped zero-temperature
/// integrand.
fn strong_poles(params: &BathParameters) -> (f64, f64) {
    let r = params.damping();
    (0.5 / r, 2.0 * r)
}

/// I(0) = ln(4R²)/R of the zero-temperature strong-damping form.
pub fn zero_t_origin_value(params: &BathParameters) -> Result<f64> {
    check_zero_t(params)?;
    let (a, b) = strong_poles(params);
    Ok((b / a).ln() / params.damping())
}

/// Zero-temperature strong-damping I(θ) through exponential integrals.
///
/// With f(c) = e^{cθ}E1(cθ) − e^{−cθ}Ei(cθ) and g(c) = e^{cθ}E1(cθ) + e^{−cθ}Ei(cθ),
/// I = [f(a) − f(b)]/2R, dI/dθ = [a·g(a) − b·g(b)]/2R and
/// d²I/dθ² = [a²f(a) − b²f(b)]/2R. The second derivative diverges as θ → 0,
/// so θ = 0 is rejected.
pub fn zero_t_i_strong(theta: f64, params: &BathParameters) -> Result<KernelSample> {
    check_theta(theta)?;
    check_zero_t(params)?;
    if theta == 0.0 {
        return Err(Error::DivergentAtOrigin);
    }
    let (a, b) = strong_poles(params);
    let fg = |c: f64| -> Result<(f64, f64)> {
        let e1 = exp_integral_e1_scaled(c * theta)?;
        let ei = exp_integral_ei_scaled(c * theta)?;
        Ok((e1 - ei, e1 + ei))
    };
    let (fa, ga) = fg(a)?;
    let (fb, gb) = fg(b)?;
    let pre = 0.5 / params.damping();
    Ok(KernelSample {
        theta,
        i: pre * (fa - fb),
        di: pre * (a * ga - b * gb),
        d2i: pre * (a * a * fa - b * b * fb),
        method: KernelMethod::ZeroTAppendix,
        weight: ThermalWeight::ZeroTemperature,
        zero_t_proxy: true,
    })
}

/// d²I/dθ²|₀ through the zero-temperature closed form: always divergent.
pub fn zero_t_second_derivative_at_zero(params: &BathParameters) -> Result<f64> {
    check_zero_t(params)?;
    Err(Error::DivergentAtOrigin)
}

/// Exponent coefficients of the reduced density matrix at one θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientSet {
    pub theta: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a3_1: f64,
    pub k: f64,
    pub f: f64,
    pub p: f64,
    pub regime: Regime,
    pub method: KernelMethod,
    /// F was obtained by interpolation across a zero of sin(Sθ).
    pub regularized: bool,
    pub lambda_c: f64,
}

impl CoefficientSet {
    /// Tr ρ² = ½√(P/F).
    pub fn purity(&self) -> f64 {
        0.5 * (self.p / self.f).sqrt()
    }
}

/// Scaled A's in closed form from the kernel moments.
fn closed_scaled_a(regime: Regime, r: f64, ph: &Phase, m: &Moments) -> [f64; 3] {
    let s = regime.s;
    let (u, sh, ch) = (ph.u, ph.sin_hat, ph.cos_hat);
    let u2 = u * u;
    let minus = r * sh - s * ch;
    let plus = r * sh + s * ch;
    let sh2 = sh * sh;
    let a1 = ((s * s * u2 * u2 + minus * minus) * m.i0 + 2.0 * s * u2 * minus * m.i
        + 2.0 * s * u2 * sh * m.di
        - sh2 * m.d2i0)
        / (8.0 * PI);
    let a2 = ((r * s * sh * (1.0 - u2) - s * s * ch * (1.0 + u2)) * m.i0
        + (2.0 * s * s * u2 - sh2) * m.i
        - 2.0 * s * sh * ch * m.di
        + sh2 * m.d2i)
        / (4.0 * PI);
    let a3 = ((s * s + plus * plus) * m.i0 - 2.0 * s * plus * m.i + 2.0 * s * sh * m.di
        - sh2 * m.d2i0)
        / (8.0 * PI);
    [a1, a2, a3]
}

/// A⁽¹⁾, A⁽²⁾, A⁽³⁾ from I(0), d²I/dθ²|₀ and the sample at θ.
pub fn a_closed_form(params: &BathParameters, moments: &Moments) -> Result<[f64; 3]> {
    let regime = non_critical(params, "a_closed_form")?;
    let r = params.damping();
    let ph = Phase::new(regime, r, moments.theta);
    let growth = (2.0 * r * moments.theta).exp();
    Ok(closed_scaled_a(regime, r, &ph, moments).map(|a| a * growth))
}

struct Assembled {
    set: CoefficientSet,
    f_finite: bool,
}

/// Builds K, A₁⁽³⁾, F and P from scaled A's.
///
/// With X = Â1 + S²u⁴ζ²/8, Y = Su²K̂ζ² − 4Â2 and Z = K̂²ζ² + 8Â3 + ŝ²/ζ²,
/// F = (8XZ − Y²)/(8ŝ²Z) and P = S²/(2Z). The order-one part of 8XZ − Y²
/// cancels analytically and is removed before dividing by ŝ².
fn assemble(
    theta: f64,
    params: &BathParameters,
    state: &InitialState,
    regime: Regime,
    ph: &Phase,
    scaled: [f64; 3],
    method: KernelMethod,
) -> Assembled {
    let s = regime.s;
    let r = params.damping();
    let z2 = state.squeezing() * state.squeezing();
    let [a1h, a2h, a3h] = scaled;
    let (u, sh, ch) = (ph.u, ph.sin_hat, ph.cos_hat);
    let u2 = u * u;
    let u4 = u2 * u2;
    let kh = s * ch + r * sh;
    let z = kh * kh * z2 + 8.0 * a3h + sh * sh / z2;
    let bracket = a1h * z + s * s * u4 * z2 * a3h + s * u2 * kh * z2 * a2h - 2.0 * a2h * a2h;
    let f = s * s * u4 / (8.0 * z) + bracket / (sh * sh * z);
    let p = s * s / (2.0 * z);
    let growth = (2.0 * r * theta).exp();
    let a3 = a3h * growth;
    Assembled {
        set: CoefficientSet {
            theta,
            a1: a1h * growth,
            a2: a2h * growth,
            a3,
            a3_1: a3 + ph.sin * ph.sin / (8.0 * z2),
            k: s * ph.cos + r * ph.sin,
            f,
            p,
            regime,
            method,
            regularized: false,
            lambda_c: params.cutoff(),
        },
        f_finite: f.is_finite() && sh != 0.0,
    }
}

/// Coefficients at θ = 0, where the bath has not acted yet.
fn initial_set(params: &BathParameters, state: &InitialState, regime: Regime, method: KernelMethod) -> CoefficientSet {
    let z2 = state.squeezing() * state.squeezing();
    CoefficientSet {
        theta: 0.0,
        a1: 0.0,
        a2: 0.0,
        a3: 0.0,
        a3_1: 0.0,
        k: regime.s,
        f: 1.0 / (8.0 * z2),
        p: 1.0 / (2.0 * z2),
        regime,
        method,
        regularized: false,
        lambda_c: params.cutoff(),
    }
}

fn plain(
    theta: f64,
    params: &BathParameters,
    state: &InitialState,
    source: &KernelSource,
    regime: Regime,
) -> Result<Assembled> {
    let ph = Phase::new(regime, params.damping(), theta);
    let m = source.moments(theta, params)?;
    let scaled = closed_scaled_a(regime, params.damping(), &ph, &m);
    Ok(assemble(theta, params, state, regime, &ph, scaled, m.method))
}

/// Cubic Lagrange interpolation through four nodes.
fn lagrange4(xs: [f64; 4], ys: [f64; 4], x: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..4 {
        let mut w = ys[i];
        for j in 0..4 {
            if i != j {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        total += w;
    }
    total
}

fn regular_f(
    theta: f64,
    params: &BathParameters,
    state: &InitialState,
    source: &KernelSource,
    regime: Regime,
) -> Result<f64> {
    let a = plain(theta, params, state, source, regime)?;
    if a.f_finite {
        Ok(a.set.f)
    } else {
        Err(Error::SingularTime { theta })
    }
}

/// Coefficient set at θ near a zero of sin(Sθ).
///
/// Every quantity but F is regular there and is evaluated directly. F is
/// interpolated from nodes outside the window. Close to θ = 0 the
/// quadrature source instead integrates the time kernels directly, which
/// has no cancellation.
fn regularized(
    theta: f64,
    params: &BathParameters,
    state: &InitialState,
    source: &KernelSource,
    regime: Regime,
) -> Result<CoefficientSet> {
    let s = regime.s;
    let n = if regime.is_overdamped() {
        0.0
    } else {
        (s * theta / PI).round()
    };
    let h = 2.0 * SINGULAR_WINDOW / s;
    let singular = |_| Error::SingularTime { theta };

    if n == 0.0 {
        if let KernelSource::Quadrature(cfg) = source {
            let ph = Phase::new(regime, params.damping(), theta);
            let scaled = integrate_a_direct_scaled(theta, params, cfg)?;
            let a = assemble(theta, params, state, regime, &ph, scaled, KernelMethod::DirectQuadrature);
            if !a.f_finite {
                return Err(Error::SingularTime { theta });
            }
            return Ok(a.set);
        }
    }

    let mut out = plain(theta, params, state, source, regime)?.set;
    let (xs, ys) = if n == 0.0 {
        let f0 = 1.0 / (8.0 * state.squeezing() * state.squeezing());
        let mut ys = [f0, 0.0, 0.0, 0.0];
        for (k, y) in ys.iter_mut().enumerate().skip(1) {
            *y = regular_f(k as f64 * h, params, state, source, regime).map_err(singular)?;
        }
        ([0.0, h, 2.0 * h, 3.0 * h], ys)
    } else {
        let centre = n * PI / s;
        let xs = [centre - 2.0 * h, centre - h, centre + h, centre + 2.0 * h];
        let mut ys = [0.0; 4];
        for (y, &x) in ys.iter_mut().zip(&xs) {
            *y = regular_f(x, params, state, source, regime).map_err(singular)?;
        }
        (xs, ys)
    };
    out.f = lagrange4(xs, ys, theta);
    out.regularized = true;
    if out.f.is_finite() && out.p.is_finite() {
        Ok(out)
    } else {
        Err(Error::SingularTime { theta })
    }
}

/// A⁽¹⁾, A⁽²⁾, A⁽³⁾, A₁⁽³⁾, K, F and P at θ.
pub fn coefficients(
    theta: f64,
    params: &BathParameters,
    state: &InitialState,
    source: &KernelSource,
) -> Result<CoefficientSet> {
    check_theta(theta)?;
    let regime = non_critical(params, "coefficients")?;
    source.check(params)?;
    let method = source.method(params);
    if theta == 0.0 {
        return Ok(initial_set(params, state, regime, method));
    }
    let ph = Phase::new(regime, params.damping(), theta);
    if ph.sin.abs() < SINGULAR_WINDOW {
        return regularized(theta, params, state, source, regime);
    }
    let a = plain(theta, params, state, source, regime)?;
    if a.f_finite && a.set.p.is_finite() {
        Ok(a.set)
    } else {
        Err(Error::SingularTime { theta })
    }
}

/// F(∞) = −(1/8π)·d²I/dθ²|₀ at the configured cutoff.
pub fn f_asymptote(params: &BathParameters, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(-second_derivative_i_at_zero(params, cfg)? / (8.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_a_direct_all, integrate_i};
    use approx::assert_relative_eq;

    fn params(r: f64, kappa: f64, cutoff: f64) -> BathParameters {
        BathParameters::new(r, kappa, cutoff).unwrap()
    }

    fn state(zeta: f64) -> InitialState {
        InitialState::new(zeta, 0.0).unwrap()
    }

    #[test]
    fn residue_origin_values() {
        let p = params(0.05, 0.01, 1e3);
        let s = residue_i_high_t(0.0, &p).unwrap();
        assert_relative_eq!(s.i, PI / 0.01, max_relative = 1e-15);
        assert_eq!(s.di, 0.0);
        assert_relative_eq!(s.d2i, -PI / 0.01, max_relative = 1e-15);

        let p = params(20.0, 0.01, 1e3);
        let s = residue_i_overdamped_high_t(0.0, &p).unwrap();
        assert_relative_eq!(s.i, PI / 0.01, max_relative = 1e-14);
    }

    #[test]
    fn residue_gates() {
        assert!(matches!(
            residue_i_high_t(1.0, &params(0.05, 0.5, 1e3)),
            Err(Error::RegimeGate { .. })
        ));
        assert!(matches!(
            residue_i_high_t(1.0, &params(3.0, 0.05, 1e3)),
            Err(Error::RegimeGate { .. })
        ));
        assert!(matches!(
            residue_i_overdamped_high_t(1.0, &params(0.3, 0.05, 1e3)),
            Err(Error::RegimeGate { .. })
        ));
    }

    #[test]
    fn residue_matches_quadrature() {
        let cfg = QuadratureConfig::default().with_weight(ThermalWeight::HighTemperature);
        let p = params(0.05, 0.01, 1e3);
        let q = integrate_i(3.0, &p, &cfg).unwrap();
        let r = residue_i_high_t(3.0, &p).unwrap();
        assert_relative_eq!(q.i, r.i, max_relative = 1e-3);

        let p = params(20.0, 0.01, 1e4);
        let q = integrate_i(0.1, &p, &cfg).unwrap();
        let r = residue_i_overdamped_high_t(0.1, &p).unwrap();
        assert_relative_eq!(q.i, r.i, max_relative = 1e-3);
    }

    #[test]
    fn overdamped_residue_decay_rate() {
        let p = params(20.0, 0.01, 1e3);
        let a = residue_i_overdamped_high_t(200.0, &p).unwrap().i;
        let b = residue_i_overdamped_high_t(240.0, &p).unwrap().i;
        let rate = (a / b).ln() / 40.0;
        assert_relative_eq!(rate, 1.0 / 40.0, max_relative = 0.01);
    }

    #[test]
    fn zero_t_form_matches_quadrature() {
        let p = params(10.0, 100.0, 1e4);
        let cfg = QuadratureConfig::default().with_weight(ThermalWeight::ZeroTemperature);
        let q = integrate_i(1.0, &p, &cfg).unwrap();
        let z = zero_t_i_strong(1.0, &p).unwrap();
        assert_relative_eq!(q.i, z.i, max_relative = 1e-2);
        assert!(z.zero_t_proxy);
    }

    #[test]
    fn zero_t_form_derivatives_are_consistent() {
        let p = params(10.0, 100.0, 1e4);
        let h = 1e-5;
        let mid = zero_t_i_strong(0.7, &p).unwrap();
        let lo = zero_t_i_strong(0.7 - h, &p).unwrap();
        let hi = zero_t_i_strong(0.7 + h, &p).unwrap();
        assert_relative_eq!(mid.di, (hi.i - lo.i) / (2.0 * h), max_relative = 1e-6);
        assert_relative_eq!(mid.d2i, (hi.di - lo.di) / (2.0 * h), max_relative = 1e-6);
    }

    #[test]
    fn zero_t_form_limits() {
        let p = params(10.0, 100.0, 1e4);
        assert!(zero_t_i_strong(5000.0, &p).unwrap().i.abs() < 1e-3);
        assert_eq!(zero_t_i_strong(0.0, &p), Err(Error::DivergentAtOrigin));
        assert_eq!(zero_t_second_derivative_at_zero(&p), Err(Error::DivergentAtOrigin));
        let near = zero_t_i_strong(1e-9, &p).unwrap().i;
        assert_relative_eq!(near, zero_t_origin_value(&p).unwrap(), max_relative = 1e-5);
        assert!(zero_t_i_strong(1.0, &params(10.0, 1.0, 1e4)).is_err());
        assert!(zero_t_i_strong(1.0, &params(0.5, 100.0, 1e4)).is_err());
    }

    #[test]
    fn closed_forms_match_direct_kernels() {
        let cfg = QuadratureConfig::default();
        for &(r, kappa) in &[(0.05, 0.05), (0.3, 2.0), (1.25, 0.5), (10.0, 0.05)] {
            let p = params(r, kappa, 200.0);
            let regime = p.regime();
            for &theta in &[0.5, 2.0] {
                let ph = Phase::new(regime, r, theta);
                let m = integrate_moments(theta, &p, &cfg).unwrap();
                let closed = closed_scaled_a(regime, r, &ph, &m);
                let direct = integrate_a_direct_scaled(theta, &p, &cfg).unwrap();
                for k in 0..3 {
                    let tol = 1e-6 * direct[k].abs() + 1e-10;
                    assert!(
                        (closed[k] - direct[k]).abs() <= tol,
                        "R {r} κ {kappa} θ {theta} A{}: {} vs {}",
                        k + 1,
                        closed[k],
                        direct[k]
                    );
                }
            }
        }
    }

    #[test]
    fn initial_values() {
        let p = params(0.3, 1.0, 1e3);
        let c = coefficients(0.0, &p, &state(2.0), &KernelSource::default()).unwrap();
        assert_eq!(c.f, 1.0 / 32.0);
        assert_relative_eq!(c.k, p.regime().s);
        assert_relative_eq!(c.purity(), 1.0, max_relative = 1e-15);
        assert_eq!([c.a1, c.a2, c.a3, c.a3_1], [0.0; 4]);
    }

    #[test]
    fn tiny_theta_matches_initial_exponent() {
        let p = params(0.05, 0.05, 1e3);
        for source in [KernelSource::default(), KernelSource::Residue] {
            let c = coefficients(1e-6, &p, &state(2.0), &source).unwrap();
            assert!(c.regularized || matches!(source, KernelSource::Quadrature(_)));
            assert_relative_eq!(c.f, 0.03125, max_relative = 1e-4);
        }
    }

    #[test]
    fn residue_and_quadrature_paths_agree() {
        let p = params(0.05, 0.05, 1e4);
        let cfg = QuadratureConfig::default().with_weight(ThermalWeight::HighTemperature);
        let q = coefficients(4.0, &p, &state(1.0), &KernelSource::Quadrature(cfg)).unwrap();
        let r = coefficients(4.0, &p, &state(1.0), &KernelSource::Residue).unwrap();
        assert_relative_eq!(q.f, r.f, max_relative = 1e-4);
        assert_relative_eq!(q.p, r.p, max_relative = 1e-4);
    }

    #[test]
    fn removable_singularity() {
        let p = params(0.05, 0.05, 1e3);
        let s = p.regime().s;
        let source = KernelSource::Residue;
        let at = coefficients(PI / s, &p, &state(1.3), &source).unwrap();
        assert!(at.regularized);
        for d in [-1e-4, 1e-4] {
            let near = coefficients(PI / s + d, &p, &state(1.3), &source).unwrap();
            assert_relative_eq!(near.f, at.f, max_relative = 1e-3);
        }
        // Just outside the window the plain formula is used.
        let out = coefficients(PI / s + 3e-3 / s, &p, &state(1.3), &source).unwrap();
        assert!(!out.regularized);
        assert_relative_eq!(out.f, at.f, max_relative = 1e-2);
    }

    #[test]
    fn continuity_across_critical_damping() {
        let cfg = QuadratureConfig::default();
        for &theta in &[0.3, 0.7, 1.0] {
            let under = coefficients(theta, &params(0.99, 0.5, 200.0), &state(1.0), &KernelSource::Quadrature(cfg)).unwrap();
            let over = coefficients(theta, &params(1.01, 0.5, 200.0), &state(1.0), &KernelSource::Quadrature(cfg)).unwrap();
            assert_relative_eq!(under.f, over.f, max_relative = 0.02);
        }
    }

    #[test]
    fn critical_damping_rejected() {
        let p = params(1.0, 0.5, 200.0);
        assert!(matches!(
            coefficients(1.0, &p, &state(1.0), &KernelSource::default()),
            Err(Error::CriticalDamping { .. })
        ));
    }

    #[test]
    fn source_gates_apply() {
        let p = params(0.05, 1.0, 200.0);
        assert!(matches!(
            coefficients(1.0, &p, &state(1.0), &KernelSource::Residue),
            Err(Error::RegimeGate { .. })
        ));
        assert!(matches!(
            coefficients(1.0, &p, &state(1.0), &KernelSource::Appendix(QuadratureConfig::default())),
            Err(Error::RegimeGate { .. })
        ));
    }

    #[test]
    fn appendix_source_runs() {
        let p = params(10.0, 100.0, 1e3);
        let c = coefficients(0.05, &p, &state(1.0), &KernelSource::Appendix(QuadratureConfig::default())).unwrap();
        assert_eq!(c.method, KernelMethod::ZeroTAppendix);
        assert!(c.f > 0.0 && c.p > 0.0);
    }

    #[test]
    fn overdamped_large_times_stay_finite() {
        let p = params(10.0, 0.05, 1e3);
        let c = coefficients(3.0, &p, &state(1.0), &KernelSource::Residue).unwrap();
        assert!(c.f.is_finite() && c.p.is_finite() && c.purity() > 0.0);
    }

    #[test]
    fn asymptote_high_temperature() {
        let cfg = QuadratureConfig::default().with_weight(ThermalWeight::HighTemperature);
        let f = f_asymptote(&params(0.05, 0.02, 1e4), &cfg).unwrap();
        assert_relative_eq!(f, 1.0 / (8.0 * 0.02), max_relative = 0.05);
    }

    #[test]
    fn asymptote_cutoff_doubling() {
        let cfg = QuadratureConfig::default().with_weight(ThermalWeight::ZeroTemperature);
        let r = 10.0;
        let lo = f_asymptote(&params(r, 1.0, 1e3), &cfg).unwrap();
        let hi = f_asymptote(&params(r, 1.0, 2e3), &cfg).unwrap();
        assert_relative_eq!(hi - lo, 4.0 * r * 2f64.ln() / (8.0 * PI), max_relative = 0.02);
        assert!(lo > 0.0);
    }

    #[test]
    fn direct_a_matches_unscaled() {
        let p = params(0.3, 1.0, 100.0);
        let cfg = QuadratureConfig::default();
        let all = integrate_a_direct_all(1.5, &p, &cfg).unwrap();
        let scaled = integrate_a_direct_scaled(1.5, &p, &cfg).unwrap();
        assert_relative_eq!(all[2] * (-2.0 * 0.3 * 1.5f64).exp(), scaled[2], max_relative = 1e-14);
    }

    #[test]
    fn lagrange_reproduces_cubic() {
        let f = |x: f64| 2.0 - x + 0.5 * x * x * x;
        let xs = [0.0, 1.0, 2.5, 3.0];
        let ys = xs.map(f);
        assert_relative_eq!(lagrange4(xs, ys, 1.7), f(1.7), max_relative = 1e-14);
    }
}

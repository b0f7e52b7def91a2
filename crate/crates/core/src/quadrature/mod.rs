//! Frequency integrals of the ohmic bath.
//!
//! I(θ) = ∫₀^{λ_C} w(λ) cos(λθ) dλ with w(λ) = 4Rλ coth(κλ)/((λ²−1)² + 4R²λ²),
//! its θ-derivatives taken under the integral sign, and the λ-integrals of the
//! time-integrated kernels that define A⁽¹⁾, A⁽²⁾ and A⁽³⁾.

pub mod gauss_kronrod;
pub mod integrands;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{BathParameters, RegimeKind};
use gauss_kronrod::{integrate, Estimate, Tolerance};
use integrands::{scaled_time_kernels, spectral_weight, thermal_factor};

/// κ at or above which `ThermalWeight::Auto` replaces coth(κλ) by 1.
pub const ZERO_T_PROXY_KAPPA: f64 = 50.0;

/// Upper bound on the number of oscillation breakpoints per integral.
pub const MAX_OSCILLATION_BREAKPOINTS: usize = 200_000;

/// Form of the thermal factor λ·coth(κλ) used inside the integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
pub enum ThermalWeight {
    /// Exact coth, switching to the zero-temperature form when κ ≥ 50.
    #[default]
    Auto,
    Exact,
    /// coth(κλ) → 1/(κλ).
    HighTemperature,
    /// coth(κλ) → 1.
    ZeroTemperature,
}

impl ThermalWeight {
    /// The concrete weight used for a given κ.
    pub fn resolve(self, kappa: f64) -> ThermalWeight {
        match self {
            ThermalWeight::Auto if kappa >= ZERO_T_PROXY_KAPPA => ThermalWeight::ZeroTemperature,
            ThermalWeight::Auto => ThermalWeight::Exact,
            other => other,
        }
    }

    /// True when `Auto` fell back to the zero-temperature proxy.
    pub fn is_proxy(self, kappa: f64) -> bool {
        self == ThermalWeight::Auto && kappa >= ZERO_T_PROXY_KAPPA
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Split the range at the zero crossings of cos(λθ).
    pub oscillation_splitting: bool,
    pub weight: ThermalWeight,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 4096,
            oscillation_splitting: true,
            weight: ThermalWeight::Auto,
        }
    }
}

impl QuadratureConfig {
    pub fn with_weight(self, weight: ThermalWeight) -> Self {
        Self { weight, ..self }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(Error::InvalidParameter {
                name: "rel_tol",
                value: self.rel_tol,
                reason: "must lie in (0, 1e-3]",
            });
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "abs_tol",
                value: self.abs_tol,
                reason: "must be finite and non-negative",
            });
        }
        if self.max_subdivisions < 64 {
            return Err(Error::InvalidParameter {
                name: "max_subdivisions",
                value: self.max_subdivisions as f64,
                reason: "must be at least 64",
            });
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance {
            rel: self.rel_tol,
            abs: self.abs_tol,
        }
    }
}

/// How a kernel sample was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum KernelMethod {
    DirectQuadrature,
    ResidueHighT,
    ResidueOverdampedHighT,
    ZeroTAppendix,
}

impl KernelMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelMethod::DirectQuadrature => "direct_quadrature",
            KernelMethod::ResidueHighT => "residue_high_t",
            KernelMethod::ResidueOverdampedHighT => "residue_overdamped_high_t",
            KernelMethod::ZeroTAppendix => "zero_t_appendix",
        }
    }
}

/// I(θ) and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSample {
    pub theta: f64,
    pub i: f64,
    pub di: f64,
    pub d2i: f64,
    pub method: KernelMethod,
    /// Thermal factor actually used; `Exact` for closed forms.
    pub weight: ThermalWeight,
    /// Set when the zero-temperature proxy replaced the exact coth.
    pub zero_t_proxy: bool,
}

/// Everything the A⁽ⁱ⁾ closed forms need at one θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub theta: f64,
    pub i0: f64,
    /// d²I/dθ² at θ = 0.
    pub d2i0: f64,
    pub i: f64,
    pub di: f64,
    pub d2i: f64,
    pub method: KernelMethod,
    pub weight: ThermalWeight,
    pub zero_t_proxy: bool,
}

impl Moments {
    pub fn sample(&self) -> KernelSample {
        KernelSample {
            theta: self.theta,
            i: self.i,
            di: self.di,
            d2i: self.d2i,
            method: self.method,
            weight: self.weight,
            zero_t_proxy: self.zero_t_proxy,
        }
    }
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

fn push_if_inside(points: &mut Vec<f64>, x: f64, hi: f64) {
    if x > 0.0 && x < hi {
        points.push(x);
    }
}

/// Initial partition of [0, λ_C].
///
/// It resolves the resonance near λ = 1 (width ~R), the overdamped scales
/// 1/(2R) and 2R, the thermal scale 1/κ and, optionally, every half period
/// of cos(λθ).
pub fn breakpoints(params: &BathParameters, theta: f64, oscillation_splitting: bool) -> Vec<f64> {
    let hi = params.cutoff();
    let r = params.damping();
    let kappa = params.kappa();
    let mut points = vec![0.0, hi, 1.0];

    for k in -3..=20 {
        let offset = r * 2f64.powi(k);
        push_if_inside(&mut points, 1.0 + offset, hi);
        push_if_inside(&mut points, 1.0 - offset, hi);
    }

    let smallest = 1f64.min(0.25 / r).min(1.0 / kappa) / 16.0;
    let mut g = smallest;
    while g < hi {
        push_if_inside(&mut points, g, hi);
        g *= 2.0;
    }
    push_if_inside(&mut points, 1.0 / kappa, hi);

    if oscillation_splitting && theta > 0.0 {
        let half_period = PI / theta;
        let count = (hi / half_period).floor() as usize;
        let stride = count.div_ceil(MAX_OSCILLATION_BREAKPOINTS).max(1);
        let mut m = 0usize;
        while m <= count {
            push_if_inside(&mut points, (m as f64 + 0.5) * half_period, hi);
            m += stride;
        }
    }

    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs().max(1e-300));
    points
}

fn run<const N: usize, F>(
    f: F,
    params: &BathParameters,
    theta: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate<N>>
where
    F: Fn(f64) -> [f64; N],
{
    cfg.validate()?;
    let points = breakpoints(params, theta, cfg.oscillation_splitting);
    let est = integrate(f, &points, cfg.tolerance(), cfg.max_subdivisions);
    if est.converged {
        Ok(est)
    } else {
        let c = est.worst_component(cfg.tolerance());
        Err(Error::NonConvergence {
            value: est.value[c],
            error_estimate: est.error[c],
            subdivisions: est.subdivisions,
        })
    }
}

/// I(θ), dI/dθ and d²I/dθ² by direct quadrature.
pub fn integrate_i(theta: f64, params: &BathParameters, cfg: &QuadratureConfig) -> Result<KernelSample> {
    check_theta(theta)?;
    let weight = cfg.weight.resolve(params.kappa());
    let est = run(
        |lambda| {
            let w = spectral_weight(params, weight, lambda);
            let (sin, cos) = (lambda * theta).sin_cos();
            [w * cos, -w * lambda * sin, -w * lambda * lambda * cos]
        },
        params,
        theta,
        cfg,
    )?;
    Ok(KernelSample {
        theta,
        i: est.value[0],
        di: est.value[1],
        d2i: est.value[2],
        method: KernelMethod::DirectQuadrature,
        weight,
        zero_t_proxy: cfg.weight.is_proxy(params.kappa()),
    })
}

/// I(0), d²I/dθ²|₀, I(θ), dI/dθ and d²I/dθ² on one shared partition.
///
/// Sharing the nodes makes the large cancellations inside the A⁽ⁱ⁾ closed
/// forms cancel to rounding level instead of to quadrature tolerance.
pub fn integrate_moments(theta: f64, params: &BathParameters, cfg: &QuadratureConfig) -> Result<Moments> {
    check_theta(theta)?;
    let weight = cfg.weight.resolve(params.kappa());
    let est = run(
        |lambda| {
            let w = spectral_weight(params, weight, lambda);
            let l2 = lambda * lambda;
            let (sin, cos) = (lambda * theta).sin_cos();
            [w, -w * l2, w * cos, -w * lambda * sin, -w * l2 * cos]
        },
        params,
        theta,
        cfg,
    )?;
    let [i0, d2i0, i, di, d2i] = est.value;
    Ok(Moments {
        theta,
        i0,
        d2i0,
        i,
        di,
        d2i,
        method: KernelMethod::DirectQuadrature,
        weight,
        zero_t_proxy: cfg.weight.is_proxy(params.kappa()),
    })
}

/// d²I/dθ² at θ = 0. Always negative; grows like ln λ_C once the cutoff
/// exceeds every other frequency.
pub fn second_derivative_i_at_zero(params: &BathParameters, cfg: &QuadratureConfig) -> Result<f64> {
    let weight = cfg.weight.resolve(params.kappa());
    let est = run(
        |lambda| [-spectral_weight(params, weight, lambda) * lambda * lambda],
        params,
        0.0,
        cfg,
    )?;
    Ok(est.value[0])
}

fn direct_kernel_weight(params: &BathParameters, cfg: &QuadratureConfig) -> Result<(ThermalWeight, f64)> {
    let regime = params.regime();
    if regime.kind == RegimeKind::Critical {
        return Err(Error::CriticalDamping {
            operation: "integrate_a_direct",
            damping: params.damping(),
        });
    }
    Ok((cfg.weight.resolve(params.kappa()), params.damping() / (2.0 * PI)))
}

/// e^{−2Rθ}·(A⁽¹⁾, A⁽²⁾, A⁽³⁾) from the time-integrated kernels.
///
/// The scaled values stay finite for strongly overdamped motion where
/// A⁽³⁾ itself grows like e^{2Rθ}.
pub fn integrate_a_direct_scaled(
    theta: f64,
    params: &BathParameters,
    cfg: &QuadratureConfig,
) -> Result<[f64; 3]> {
    check_theta(theta)?;
    let (weight, prefactor) = direct_kernel_weight(params, cfg)?;
    if theta == 0.0 {
        return Ok([0.0; 3]);
    }
    let regime = params.regime();
    let r = params.damping();
    let kappa = params.kappa();
    let est = run(
        |lambda| {
            let k = scaled_time_kernels(regime, r, lambda, theta);
            let w = prefactor * thermal_factor(weight, lambda, kappa);
            [w * k[0], w * k[1], w * k[2]]
        },
        params,
        theta,
        cfg,
    )?;
    Ok(est.value)
}

/// (A⁽¹⁾, A⁽²⁾, A⁽³⁾) from the time-integrated kernels.
pub fn integrate_a_direct_all(theta: f64, params: &BathParameters, cfg: &QuadratureConfig) -> Result<[f64; 3]> {
    let scaled = integrate_a_direct_scaled(theta, params, cfg)?;
    let growth = (2.0 * params.damping() * theta).exp();
    Ok(scaled.map(|a| a * growth))
}

/// A⁽ⁱ⁾(θ) for a single index i ∈ {1, 2, 3}.
pub fn integrate_a_direct(index: usize, theta: f64, params: &BathParameters, cfg: &QuadratureConfig) -> Result<f64> {
    if !(1..=3).contains(&index) {
        return Err(Error::InvalidParameter {
            name: "index",
            value: index as f64,
            reason: "must be 1, 2 or 3",
        });
    }
    Ok(integrate_a_direct_all(theta, params, cfg)?[index - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(r: f64, kappa: f64, cutoff: f64) -> BathParameters {
        BathParameters::new(r, kappa, cutoff).unwrap()
    }

    #[test]
    fn config_validation() {
        let cfg = QuadratureConfig::default();
        assert!(cfg.validate().is_ok());
        assert!(cfg.with_rel_tol(0.0).validate().is_err());
        assert!(cfg.with_rel_tol(1e-2).validate().is_err());
        let small = QuadratureConfig {
            max_subdivisions: 10,
            ..cfg
        };
        assert!(small.validate().is_err());
    }

    #[test]
    fn weight_resolution() {
        assert_eq!(ThermalWeight::Auto.resolve(50.0), ThermalWeight::ZeroTemperature);
        assert_eq!(ThermalWeight::Auto.resolve(49.0), ThermalWeight::Exact);
        assert!(ThermalWeight::Auto.is_proxy(60.0));
        assert!(!ThermalWeight::ZeroTemperature.is_proxy(60.0));
    }

    #[test]
    fn high_temperature_origin_value() {
        let p = params(0.01, 0.01, 200.0);
        let s = integrate_i(0.0, &p, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(s.i, PI / 0.01, max_relative = 0.01);
        assert_eq!(s.di, 0.0);
        assert_eq!(s.method, KernelMethod::DirectQuadrature);
    }

    #[test]
    fn long_time_decay() {
        let p = params(0.3, 1.0, 1e3);
        let cfg = QuadratureConfig::default();
        let origin = integrate_i(0.0, &p, &cfg).unwrap().i;
        let late = integrate_i(500.0, &p, &cfg).unwrap().i;
        assert!(late.abs() <= 1e-3 * origin.abs());
    }

    #[test]
    fn overdamped_matches_residue_form() {
        let (r, kappa, theta) = (20.0f64, 0.01, 0.05);
        let s = (r * r - 1.0).sqrt();
        let p = params(r, kappa, 1e4);
        let cfg = QuadratureConfig::default().with_weight(ThermalWeight::HighTemperature);
        let q = integrate_i(theta, &p, &cfg).unwrap();
        let exact = PI / (kappa * s)
            * (-r * theta).exp()
            * (s * (s * theta).cosh() + r * (s * theta).sinh());
        assert_relative_eq!(q.i, exact, max_relative = 1e-3);
    }

    #[test]
    fn origin_moment_matches_plain_weight_integral() {
        let p = params(0.2, 0.7, 300.0);
        let cfg = QuadratureConfig::default();
        let sample = integrate_i(0.0, &p, &cfg).unwrap();
        let weight = cfg.weight.resolve(p.kappa());
        let est = integrate(
            |l| [spectral_weight(&p, weight, l)],
            &breakpoints(&p, 0.0, false),
            Tolerance { rel: 1e-12, abs: 0.0 },
            4096,
        );
        assert_relative_eq!(sample.i, est.value[0], max_relative = 1e-10);
    }

    #[test]
    fn moments_agree_with_separate_integrals() {
        let p = params(0.05, 0.5, 200.0);
        let cfg = QuadratureConfig::default();
        let m = integrate_moments(3.0, &p, &cfg).unwrap();
        let s = integrate_i(3.0, &p, &cfg).unwrap();
        let s0 = integrate_i(0.0, &p, &cfg).unwrap();
        assert_relative_eq!(m.i, s.i, max_relative = 1e-8);
        assert_relative_eq!(m.di, s.di, max_relative = 1e-8);
        assert_relative_eq!(m.d2i, s.d2i, max_relative = 1e-8);
        assert_relative_eq!(m.i0, s0.i, max_relative = 1e-8);
        assert_relative_eq!(m.d2i0, s0.d2i, max_relative = 1e-8);
        let d2 = second_derivative_i_at_zero(&p, &cfg).unwrap();
        assert_relative_eq!(m.d2i0, d2, max_relative = 1e-8);
    }

    #[test]
    fn second_derivative_log_growth() {
        let cfg = QuadratureConfig::default().with_weight(ThermalWeight::ZeroTemperature);
        let r = 10.0;
        let values: Vec<f64> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&c| -second_derivative_i_at_zero(&params(r, 1.0, c), &cfg).unwrap())
            .collect();
        let expected = 4.0 * r * 10f64.ln();
        for w in values.windows(2) {
            assert_relative_eq!(w[1] - w[0], expected, max_relative = 0.1);
        }
    }

    #[test]
    fn second_derivative_high_temperature() {
        let p = params(0.05, 0.01, 1e3);
        let cfg = QuadratureConfig::default().with_weight(ThermalWeight::HighTemperature);
        let d2 = second_derivative_i_at_zero(&p, &cfg).unwrap();
        assert_relative_eq!(-d2, PI / 0.01, max_relative = 0.05);
    }

    #[test]
    fn second_derivative_is_negative() {
        for &(r, kappa) in &[(0.01, 0.01), (0.5, 1.0), (3.0, 60.0), (10.0, 0.05)] {
            let d2 = second_derivative_i_at_zero(&params(r, kappa, 500.0), &QuadratureConfig::default())
                .unwrap();
            assert!(d2 < 0.0);
        }
    }

    #[test]
    fn splitting_does_not_change_result() {
        let p = params(0.3, 0.5, 50.0);
        let on = QuadratureConfig::default();
        let off = QuadratureConfig {
            oscillation_splitting: false,
            ..on
        };
        let a = integrate_i(9.0, &p, &on).unwrap();
        let b = integrate_i(9.0, &p, &off).unwrap();
        let scale = integrate_i(0.0, &p, &on).unwrap().i;
        assert!((a.i - b.i).abs() <= 1e-8 * scale);
        assert!((a.d2i - b.d2i).abs() <= 1e-7 * scale);
    }

    #[test]
    fn symmetric_range_agrees() {
        let p = params(0.2, 0.3, 40.0);
        let cfg = QuadratureConfig::default();
        let theta = 1.3;
        let half = integrate_i(theta, &p, &cfg).unwrap().i;
        let weight = cfg.weight.resolve(p.kappa());
        let grid: Vec<f64> = (-400..=400).map(|k| 0.1 * k as f64).collect();
        let full = integrate(
            |l: f64| [0.5 * spectral_weight(&p, weight, l.abs()) * (l * theta).cos()],
            &grid,
            Tolerance { rel: 1e-10, abs: 1e-12 },
            4096,
        );
        assert_relative_eq!(half, full.value[0], max_relative = 1e-8);
    }

    #[test]
    fn halving_tolerance_is_self_consistent() {
        let p = params(0.05, 0.2, 500.0);
        let loose = QuadratureConfig::default().with_rel_tol(1e-6);
        let tight = loose.with_rel_tol(5e-7);
        let a = integrate_i(4.0, &p, &loose).unwrap();
        let b = integrate_i(4.0, &p, &tight).unwrap();
        let scale = integrate_i(0.0, &p, &loose).unwrap().i;
        assert!((a.i - b.i).abs() <= 1e-6 * scale);
    }

    #[test]
    fn direct_kernels_vanish_at_origin() {
        let p = params(0.3, 1.0, 100.0);
        let cfg = QuadratureConfig::default();
        for i in 1..=3 {
            assert_eq!(integrate_a_direct(i, 0.0, &p, &cfg).unwrap(), 0.0);
        }
        assert!(integrate_a_direct(4, 1.0, &p, &cfg).is_err());
    }

    #[test]
    fn direct_kernels_reject_critical() {
        let p = params(1.0, 1.0, 100.0);
        assert!(matches!(
            integrate_a_direct_all(1.0, &p, &QuadratureConfig::default()),
            Err(Error::CriticalDamping { .. })
        ));
    }

    #[test]
    fn invalid_theta() {
        let p = params(0.3, 1.0, 100.0);
        assert!(integrate_i(-1.0, &p, &QuadratureConfig::default()).is_err());
        assert!(integrate_i(f64::NAN, &p, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn exhausted_budget_is_non_convergence() {
        let p = params(0.001, 0.01, 1e4);
        let cfg = QuadratureConfig {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_subdivisions: 64,
            oscillation_splitting: false,
            weight: ThermalWeight::Exact,
        };
        assert!(matches!(
            integrate_i(300.0, &p, &cfg),
            Err(Error::NonConvergence { .. })
        ));
    }
}

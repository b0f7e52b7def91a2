//! Asymptotic results for weak (R ≪ 1) and strong (R ≫ 1) damping.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{relaxation_time, BathParameters, InitialState};

/// Largest R treated as weak damping.
pub const WEAK_DAMPING_LIMIT: f64 = 0.05;

/// Largest R·κ for which the weak-damping expansion holds.
pub const WEAK_RK_LIMIT: f64 = 0.1;

/// Smallest R treated as strong damping.
pub const STRONG_DAMPING_LIMIT: f64 = 5.0;

/// Largest κ for the strong-damping high-temperature expansion.
pub const STRONG_KAPPA_LIMIT: f64 = 0.1;

/// Largest θ for the strong-damping expansion of A⁽ⁱ⁾.
pub const STRONG_THETA_LIMIT: f64 = 0.2;

/// Denominators below this are treated as a divergent decoherence time.
pub const DIVERGENCE_THRESHOLD: f64 = 1e-12;

/// Which form of coth κ enters the weak-damping formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Validity {
    /// coth κ → 1/κ.
    HighT,
    /// coth κ → 1, an upper bound on τ_D.
    LowTUpperBound,
    /// Exact coth κ.
    General,
}

impl Validity {
    pub fn coth(self, kappa: f64) -> f64 {
        match self {
            Validity::HighT => 1.0 / kappa,
            Validity::LowTUpperBound => 1.0,
            Validity::General => 1.0 / kappa.tanh(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Validity::HighT => "high_t",
            Validity::LowTUpperBound => "low_t_upper_bound",
            Validity::General => "general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegimeTag {
    Weak,
    Strong,
}

fn coth(kappa: f64) -> f64 {
    1.0 / kappa.tanh()
}

/// Period-π factor multiplying Rθ/4 in the weak-damping exponent.
pub fn phi(theta: f64, kappa: f64, zeta: f64) -> f64 {
    phi_with_coth(theta, coth(kappa), zeta)
}

fn phi_with_coth(theta: f64, c: f64, zeta: f64) -> f64 {
    let (sin, cos) = theta.sin_cos();
    let (s2, c2) = (sin * sin, cos * cos);
    let z2 = zeta * zeta;
    let z4 = z2 * z2;
    let num = (z2 - c) * s2 + z4 * z2 * c2 * (1.0 - z2 * c);
    let den = z4 * c2 + s2;
    num / (den * den)
}

/// Average of φ over one period: [2ζ² − (1 + ζ⁴)coth κ]/(2ζ²).
pub fn phi_average(kappa: f64, zeta: f64) -> f64 {
    phi_average_with_coth(coth(kappa), zeta)
}

/// Period average of φ with an explicit value for coth κ.
pub fn phi_average_with_coth(coth_kappa: f64, zeta: f64) -> f64 {
    let z2 = zeta * zeta;
    (2.0 * z2 - (1.0 + z2 * z2) * coth_kappa) / (2.0 * z2)
}

/// Weak-damping rate Γ = −(R/4)r²⟨φ⟩ in units of ω₀.
pub fn weak_rate(damping: f64, coth_kappa: f64, zeta: f64, r: f64) -> f64 {
    -0.25 * damping * r * r * phi_average_with_coth(coth_kappa, zeta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakDampingResult {
    pub phi_avg: f64,
    /// Decay rate in units of ω₀.
    pub gamma: f64,
    pub tau_d_over_tau_r: f64,
    pub validity: Validity,
    /// (1 + ζ⁴)coth κ − 2ζ² vanished: the decoherence time is infinite.
    pub divergent: bool,
}

fn check_weak(params: &BathParameters) -> Result<()> {
    let r = params.damping();
    if r > WEAK_DAMPING_LIMIT {
        return Err(Error::RegimeGate {
            operation: "weak damping",
            reason: format!("R = {r} exceeds {WEAK_DAMPING_LIMIT}"),
        });
    }
    if r * params.kappa() > WEAK_RK_LIMIT {
        return Err(Error::RegimeGate {
            operation: "weak damping",
            reason: format!("R·kappa = {} exceeds {WEAK_RK_LIMIT}", r * params.kappa()),
        });
    }
    Ok(())
}

fn check_strong(params: &BathParameters) -> Result<()> {
    let r = params.damping();
    if r < STRONG_DAMPING_LIMIT {
        return Err(Error::RegimeGate {
            operation: "strong damping",
            reason: format!("R = {r} is below {STRONG_DAMPING_LIMIT}"),
        });
    }
    if params.kappa() > STRONG_KAPPA_LIMIT {
        return Err(Error::RegimeGate {
            operation: "strong damping",
            reason: format!("kappa = {} exceeds {STRONG_KAPPA_LIMIT}", params.kappa()),
        });
    }
    Ok(())
}

fn check_distance(r: f64) -> Result<()> {
    if r.is_finite() && r != 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "r",
            value: r,
            reason: "must be finite and non-zero",
        })
    }
}

/// τ_D/τ_R = [8/((1 + ζ⁴)coth κ − 2ζ²)]·(ζ/r)² for weak damping.
pub fn tau_d_weak(
    params: &BathParameters,
    state: &InitialState,
    r: f64,
    validity: Validity,
) -> Result<WeakDampingResult> {
    check_weak(params)?;
    check_distance(r)?;
    let zeta = state.squeezing();
    let z2 = zeta * zeta;
    let c = validity.coth(params.kappa());
    let denom = (1.0 + z2 * z2) * c - 2.0 * z2;
    let phi_avg = phi_average_with_coth(c, zeta);
    let gamma = weak_rate(params.damping(), c, zeta, r);
    let divergent = denom <= DIVERGENCE_THRESHOLD;
    let tau_d_over_tau_r = if divergent {
        f64::INFINITY
    } else {
        8.0 / denom * (z2 / (r * r))
    };
    Ok(WeakDampingResult {
        phi_avg,
        gamma,
        tau_d_over_tau_r,
        validity,
        divergent,
    })
}

/// First-order-in-1/R expansions of A⁽¹⁾, A⁽²⁾ and A⁽³⁾ at high temperature.
pub fn strong_damping_a(theta: f64, params: &BathParameters) -> Result<[f64; 3]> {
    check_strong(params)?;
    if !(0.0..=STRONG_THETA_LIMIT).contains(&theta) {
        return Err(Error::RegimeGate {
            operation: "strong-damping expansion",
            reason: format!("theta = {theta} outside [0, {STRONG_THETA_LIMIT}]"),
        });
    }
    let kappa = params.kappa();
    let x = params.damping() * theta;
    let (ep, em) = ((2.0 * x).exp(), (-2.0 * x).exp());
    let a1 = -em * (3.0 + 4.0 * x - 4.0 * ep + ep * ep) / (32.0 * kappa);
    let a2 = (x - 0.25 * (ep - em)) / (4.0 * kappa);
    let a3 = em * (-4.0 + em + ep * (3.0 - 4.0 * x)) / (32.0 * kappa);
    Ok([a1, a2, a3])
}

/// F(θ) = [(1 − e^{−4Rθ})ζ² + κe^{−4Rθ}]/(8κζ²), the saturating strong-damping form.
pub fn strong_saturating_f(theta: f64, params: &BathParameters, state: &InitialState) -> f64 {
    let kappa = params.kappa();
    let z2 = state.squeezing() * state.squeezing();
    let e = (-4.0 * params.damping() * theta).exp();
    ((1.0 - e) * z2 + kappa * e) / (8.0 * kappa * z2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongDampingResult {
    /// dF/dθ of the linearized exponent.
    pub f_linear_slope: f64,
    /// Γ = f_linear_slope·r² in units of ω₀.
    pub gamma: f64,
    pub tau_d_over_tau_r: f64,
    /// A⁽¹⁾, A⁽²⁾, A⁽³⁾ expansions at the end of the default window, Rθ = 0.5.
    pub a_expansion: [f64; 3],
    /// κ > ζ²: off-diagonal elements grow instead of decaying.
    pub coherence_gain: bool,
}

/// Linearized strong-damping decoherence:
/// Γ = (R/2)r²(ζ² − κ)/(κζ²) and τ_D/τ_R = (1/R²)(κ/(ζ² − κ))(ζ/r)².
pub fn tau_d_strong(params: &BathParameters, state: &InitialState, r: f64) -> Result<StrongDampingResult> {
    check_strong(params)?;
    check_distance(r)?;
    let rr = params.damping();
    let kappa = params.kappa();
    let z2 = state.squeezing() * state.squeezing();
    let gap = z2 - kappa;
    if gap.abs() <= 1e-12 * kappa {
        return Err(Error::DegenerateCase {
            reason: "kappa equals zeta squared, the linear slope vanishes",
        });
    }
    let f_linear_slope = 0.5 * rr * gap / (kappa * z2);
    let theta_end = (0.5 / rr).min(STRONG_THETA_LIMIT);
    Ok(StrongDampingResult {
        f_linear_slope,
        gamma: f_linear_slope * r * r,
        tau_d_over_tau_r: kappa / (rr * rr * gap) * z2 / (r * r),
        a_expansion: strong_damping_a(theta_end, params)?,
        coherence_gain: gap < 0.0,
    })
}

/// ds/d(γt) in the linear regime of each damping limit.
pub fn purity_slope(params: &BathParameters, state: &InitialState, tag: RegimeTag) -> Result<f64> {
    let z2 = state.squeezing() * state.squeezing();
    let kappa = params.kappa();
    match tag {
        RegimeTag::Weak => {
            check_weak(params)?;
            Ok(-((z2 * z2 + 1.0) * coth(kappa) - 2.0 * z2) / z2)
        }
        RegimeTag::Strong => {
            check_strong(params)?;
            Ok(-2.0 * (z2 / kappa - 1.0))
        }
    }
}

/// τ_D/τ_R from a fitted rate Γ (units of ω₀).
pub fn tau_ratio_from_rate(params: &BathParameters, gamma: f64) -> Result<f64> {
    Ok(1.0 / (gamma * relaxation_time(params)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_kronrod::{integrate, Tolerance};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(r: f64, kappa: f64) -> BathParameters {
        BathParameters::new(r, kappa, 1e3).unwrap()
    }

    fn state(zeta: f64) -> InitialState {
        InitialState::new(zeta, 0.0).unwrap()
    }

    #[test]
    fn phi_examples() {
        for &t in &[0.0, 0.4, 2.0] {
            assert_relative_eq!(phi(t, 0.3, 1.0), 1.0 - coth(0.3), max_relative = 1e-13);
        }
        assert_relative_eq!(phi(0.37, 0.2, 1.5), phi(0.37 + std::f64::consts::PI, 0.2, 1.5), max_relative = 1e-12);
        assert!(phi(1.1, 800.0, 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_average_examples() {
        assert_eq!(phi_average_with_coth(1.0, 1.0), 0.0);
        assert_relative_eq!(phi_average(0.05, 1.0), 1.0 - coth(0.05), max_relative = 1e-14);
        assert_relative_eq!(phi_average(0.05, 1.0), -19.0167, epsilon = 1e-4);
    }

    #[test]
    fn phi_average_matches_quadrature() {
        let pi = std::f64::consts::PI;
        for &kappa in &[0.05, 0.2, 1.0, 3.0] {
            for &zeta in &[0.6, 1.0, 1.5, 2.2] {
                let est = integrate(
                    |t| [phi(t, kappa, zeta)],
                    &[0.0, 0.25 * pi, 0.5 * pi, 0.75 * pi, pi],
                    Tolerance { rel: 1e-13, abs: 0.0 },
                    2000,
                );
                let avg = est.value[0] / pi;
                assert!((avg - phi_average(kappa, zeta)).abs() <= 1e-8 * avg.abs().max(1.0));
            }
        }
    }

    #[test]
    fn weak_tau_examples() {
        let p = params(0.01, 0.05);
        let res = tau_d_weak(&p, &state(1.0), 1.0, Validity::HighT).unwrap();
        assert_relative_eq!(res.tau_d_over_tau_r, 0.4 / 1.9, max_relative = 1e-12);
        let bound = tau_d_weak(&p, &state(1.0), 1.0, Validity::LowTUpperBound).unwrap();
        assert!(bound.divergent && bound.tau_d_over_tau_r.is_infinite());
        assert_eq!(bound.gamma, 0.0);
        let far = tau_d_weak(&p, &state(1.3), 2.0, Validity::General).unwrap();
        let near = tau_d_weak(&p, &state(1.3), 1.0, Validity::General).unwrap();
        assert_relative_eq!(near.tau_d_over_tau_r / far.tau_d_over_tau_r, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn weak_tau_consistent_with_rate() {
        let p = params(0.01, 0.05);
        let res = tau_d_weak(&p, &state(1.4), 0.7, Validity::General).unwrap();
        assert_relative_eq!(
            res.tau_d_over_tau_r,
            tau_ratio_from_rate(&p, res.gamma).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn weak_gates() {
        assert!(tau_d_weak(&params(0.1, 0.05), &state(1.0), 1.0, Validity::General).is_err());
        assert!(tau_d_weak(&params(0.05, 5.0), &state(1.0), 1.0, Validity::General).is_err());
        assert!(tau_d_weak(&params(0.01, 5.0), &state(1.0), 0.0, Validity::General).is_err());
    }

    #[test]
    fn strong_expansion_examples() {
        let p = params(20.0, 0.01);
        assert_eq!(strong_damping_a(0.0, &p).unwrap(), [0.0, 0.0, 0.0]);
        for &t in &[0.001, 0.02, 0.2] {
            assert!(strong_damping_a(t, &p).unwrap()[1] < 0.0);
        }
        assert!(strong_damping_a(0.3, &p).is_err());
        assert!(strong_damping_a(0.1, &params(2.0, 0.01)).is_err());
    }

    #[test]
    fn strong_tau_examples() {
        let p = params(10.0, 0.01);
        let res = tau_d_strong(&p, &state(1.0), 1.0).unwrap();
        assert_relative_eq!(res.tau_d_over_tau_r, 0.01 / 0.99 / 100.0, max_relative = 1e-12);
        assert!(!res.coherence_gain);
        assert_relative_eq!(
            res.tau_d_over_tau_r,
            tau_ratio_from_rate(&p, res.gamma).unwrap(),
            max_relative = 1e-12
        );
        let gain = tau_d_strong(&p, &state(0.05), 1.0).unwrap();
        assert!(gain.coherence_gain && gain.gamma < 0.0);
        assert!(matches!(
            tau_d_strong(&p, &state(0.1), 1.0),
            Err(Error::DegenerateCase { .. })
        ));
    }

    #[test]
    fn saturating_form() {
        let p = params(10.0, 0.01);
        let s = state(1.0);
        assert_relative_eq!(strong_saturating_f(0.0, &p, &s), 1.0 / 8.0, max_relative = 1e-14);
        assert_relative_eq!(strong_saturating_f(5.0, &p, &s), 1.0 / 0.08, max_relative = 1e-12);
        let h = 1e-7;
        let slope = (strong_saturating_f(h, &p, &s) - strong_saturating_f(0.0, &p, &s)) / h;
        let lin = tau_d_strong(&p, &s, 1.0).unwrap().f_linear_slope;
        assert_relative_eq!(slope, lin, max_relative = 1e-5);
    }

    #[test]
    fn purity_slopes() {
        let p = params(0.005, 100.0);
        assert!(purity_slope(&p, &state(1.0), RegimeTag::Weak).is_err());
        let p = params(0.001, 100.0);
        assert!(purity_slope(&p, &state(1.0), RegimeTag::Weak).unwrap().abs() < 1e-12);
        let p = params(10.0, 0.01);
        assert_relative_eq!(purity_slope(&p, &state(1.0), RegimeTag::Strong).unwrap(), -198.0);
        assert!(purity_slope(&p, &state(1.0), RegimeTag::Weak).is_err());
    }

    proptest! {
        #[test]
        fn high_t_variant_is_general_with_substitution(kappa in 0.005f64..0.1, zeta in 0.3f64..3.0) {
            let p = params(0.01, kappa);
            let a = tau_d_weak(&p, &state(zeta), 1.0, Validity::HighT).unwrap();
            let z2 = zeta * zeta;
            let direct = 8.0 / ((1.0 + z2 * z2) / kappa - 2.0 * z2) * z2;
            prop_assert!((a.tau_d_over_tau_r - direct).abs() <= 1e-12 * direct);
        }

        #[test]
        fn tau_times_r_squared_is_constant(r in prop::sample::select(vec![0.5, 1.0, 2.0, 4.0])) {
            let weak = tau_d_weak(&params(0.01, 0.5), &state(1.3), r, Validity::General).unwrap();
            let weak_ref = tau_d_weak(&params(0.01, 0.5), &state(1.3), 1.0, Validity::General).unwrap();
            prop_assert!((weak.tau_d_over_tau_r * r * r - weak_ref.tau_d_over_tau_r).abs() <= 1e-12 * weak_ref.tau_d_over_tau_r);
            let strong = tau_d_strong(&params(10.0, 0.01), &state(1.0), r).unwrap();
            let strong_ref = tau_d_strong(&params(10.0, 0.01), &state(1.0), 1.0).unwrap();
            prop_assert!((strong.tau_d_over_tau_r * r * r - strong_ref.tau_d_over_tau_r).abs() <= 1e-12 * strong_ref.tau_d_over_tau_r);
        }
    }
}

//! Thermal weight and exponential integrals.

use serde::Serialize;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

/// Below this value of κλ the thermal weight is taken from its Taylor series.
pub const COTH_SERIES_LIMIT: f64 = 1e-3;

/// E1 switches from its power series to a continued fraction above this point.
pub const E1_SERIES_LIMIT: f64 = 1.0;

/// Ei switches from its power series to the asymptotic expansion above this point.
pub const EI_SERIES_LIMIT: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaluationResult {
    pub value: f64,
    /// Absolute error estimate.
    pub est_error: f64,
}

/// λ·coth(κλ), continuous at λ = 0 where it equals 1/κ.
pub fn coth_weight(lambda: f64, kappa: f64) -> f64 {
    let x = kappa * lambda;
    if x < COTH_SERIES_LIMIT {
        // x coth x = 1 + x²/3 − x⁴/45 + …
        let x2 = x * x;
        (1.0 + x2 / 3.0 - x2 * x2 / 45.0) / kappa
    } else {
        lambda / x.tanh()
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { x })
    }
}

/// Σ_{k≥1} (−x)^k/(k·k!) with the magnitude of the largest term.
fn e1_power_sum(x: f64) -> (f64, f64) {
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut largest: f64 = 0.0;
    for k in 1..200 {
        let k = k as f64;
        term *= -x / k;
        let t = term / k;
        sum += t;
        largest = largest.max(t.abs());
        if t.abs() <= f64::EPSILON * sum.abs().max(1e-300) {
            break;
        }
    }
    (sum, largest)
}

/// e^x·E1(x) for x > 1 by the modified Lentz continued fraction.
fn e1_scaled_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

/// Exponential integral E1(x) = Γ(0, x) with an error estimate.
pub fn exp_integral_e1_with_error(x: f64) -> Result<EvaluationResult> {
    check_positive(x)?;
    if x <= E1_SERIES_LIMIT {
        let (sum, largest) = e1_power_sum(x);
        let log = -EULER_GAMMA - x.ln();
        let value = log - sum;
        let est_error = 4.0 * f64::EPSILON * (log.abs() + largest);
        Ok(EvaluationResult { value, est_error })
    } else {
        let value = (-x).exp() * e1_scaled_fraction(x);
        Ok(EvaluationResult {
            value,
            est_error: 8.0 * f64::EPSILON * value,
        })
    }
}

/// Exponential integral E1(x) = ∫ₓ^∞ e^{−t}/t dt for x > 0.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    exp_integral_e1_with_error(x).map(|r| r.value)
}

/// e^x·E1(x), finite for arbitrarily large x.
pub fn exp_integral_e1_scaled(x: f64) -> Result<f64> {
    check_positive(x)?;
    if x <= E1_SERIES_LIMIT {
        Ok(x.exp() * exp_integral_e1(x)?)
    } else {
        Ok(e1_scaled_fraction(x))
    }
}

/// Σ_{n≥1} xⁿ/(n·n!) for 0 < x ≤ 40.
fn ei_power_sum(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..400 {
        let n = n as f64;
        term *= x / n;
        let t = term / n;
        sum += t;
        if t <= f64::EPSILON * sum {
            break;
        }
    }
    sum
}

/// e^{−x}·Ei(x) from the divergent asymptotic series, truncated at its
/// smallest term. Used only for x > 40.
fn ei_scaled_asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let next = term * k as f64 / x;
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term <= f64::EPSILON * sum {
            break;
        }
    }
    sum / x
}

/// Principal-value exponential integral Ei(x) with an error estimate.
pub fn exp_integral_ei_with_error(x: f64) -> Result<EvaluationResult> {
    check_positive(x)?;
    if x <= EI_SERIES_LIMIT {
        let sum = ei_power_sum(x);
        let log = EULER_GAMMA + x.ln();
        let value = log + sum;
        let est_error = 4.0 * f64::EPSILON * (log.abs() + sum);
        Ok(EvaluationResult { value, est_error })
    } else {
        let value = x.exp() * ei_scaled_asymptotic(x);
        Ok(EvaluationResult {
            value,
            est_error: 8.0 * f64::EPSILON * value,
        })
    }
}

/// Principal-value exponential integral Ei(x) for x > 0.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    exp_integral_ei_with_error(x).map(|r| r.value)
}

/// e^{−x}·Ei(x), finite for arbitrarily large x.
pub fn exp_integral_ei_scaled(x: f64) -> Result<f64> {
    check_positive(x)?;
    if x <= EI_SERIES_LIMIT {
        Ok((-x).exp() * exp_integral_ei(x)?)
    } else {
        Ok(ei_scaled_asymptotic(x))
    }
}

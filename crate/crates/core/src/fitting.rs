//! Least-squares extraction of decay rates and cutoff divergences.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{relaxation_time, BathParameters};

/// Minimum number of samples for a decay-rate fit.
pub const MIN_DECAY_POINTS: usize = 8;

/// Number of samples in the default strong-damping window.
pub const STRONG_WINDOW_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// Coefficient of determination.
    pub r_squared: f64,
    pub window: [f64; 2],
    pub n_points: usize,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares through (x, y) pairs; needs two distinct abscissae.
pub fn least_squares(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len();
    let too_narrow = || Error::WindowTooNarrow {
        reason: format!("{n} points do not determine a line"),
    };
    if n < 2 {
        return Err(too_narrow());
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(too_narrow());
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    Ok(LinearFit {
        slope,
        intercept,
        residual_rms: (sse / nf).sqrt(),
        r_squared,
        window: [lo, hi],
        n_points: n,
    })
}

/// Fits y = Γθ + c to the samples of `series` that fall inside `window`.
///
/// Fails with `NonlinearSeries` when the residual RMS exceeds 10% of the
/// range spanned by the samples, ignoring residuals at rounding level.
pub fn fit_decay_rate(series: &[(f64, f64)], window: [f64; 2]) -> Result<LinearFit> {
    let [lo, hi] = window;
    if !(lo < hi) {
        return Err(Error::WindowTooNarrow {
            reason: format!("empty window [{lo}, {hi}]"),
        });
    }
    let inside: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|p| p.0 >= lo && p.0 <= hi)
        .collect();
    if inside.len() < MIN_DECAY_POINTS {
        return Err(Error::WindowTooNarrow {
            reason: format!(
                "{} samples in [{lo}, {hi}], at least {MIN_DECAY_POINTS} needed",
                inside.len()
            ),
        });
    }
    let fit = least_squares(&inside)?;
    let (ymin, ymax) = inside
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let range = ymax - ymin;
    let noise = 1e-12 * ymin.abs().max(ymax.abs());
    if fit.residual_rms > 0.1 * range && fit.residual_rms > noise {
        return Err(Error::NonlinearSeries {
            residual_rms: fit.residual_rms,
            range,
        });
    }
    Ok(fit)
}

/// Fits −d²I/dθ²|₀ against ln λ_C. Needs three samples over three decades.
pub fn fit_log_divergence(samples: &[(f64, f64)]) -> Result<LinearFit> {
    if samples.len() < 3 {
        return Err(Error::WindowTooNarrow {
            reason: format!("{} cutoff values, at least 3 needed", samples.len()),
        });
    }
    if let Some(bad) = samples.iter().find(|p| !(p.0 > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "lambda_c",
            value: bad.0,
            reason: "must be positive",
        });
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let decades = (hi / lo).log10();
    if decades < 3.0 - 1e-9 {
        return Err(Error::WindowTooNarrow {
            reason: format!("cutoffs span {decades:.3} decades, at least 3 needed"),
        });
    }
    let logs: Vec<(f64, f64)> = samples.iter().map(|p| (p.0.ln(), p.1)).collect();
    least_squares(&logs)
}

/// Sample times θ = nπ inside [2π, min(40π, 0.5/R)].
pub fn weak_window_times(params: &BathParameters) -> Vec<f64> {
    let hi = (40.0 * std::f64::consts::PI).min(0.5 / params.damping());
    (2..)
        .map(|n| n as f64 * std::f64::consts::PI)
        .take_while(|&t| t <= hi * (1.0 + 1e-12))
        .collect()
}

/// 32 uniform samples over Rθ ∈ [0.02, 0.5].
pub fn strong_window_times(params: &BathParameters) -> Vec<f64> {
    let r = params.damping();
    let (lo, hi) = (0.02 / r, 0.5 / r);
    let n = STRONG_WINDOW_SAMPLES;
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Checks that a fit window respects the time-scale separation of the
/// regime: 2π ≤ θ ≤ θ_R/2 when underdamped, θ ≤ 0.2 and Rθ ≤ 1 when
/// overdamped.
pub fn check_window(params: &BathParameters, window: [f64; 2]) -> Result<()> {
    let [lo, hi] = window;
    let slack = 1.0 + 1e-12;
    let reason = if params.regime().is_overdamped() {
        let r = params.damping();
        (hi > 0.2 * slack || r * hi > slack)
            .then(|| format!("window [{lo}, {hi}] must satisfy θ ≤ 0.2 and Rθ ≤ 1"))
    } else {
        let tau = relaxation_time(params)?;
        (lo * slack < 2.0 * std::f64::consts::PI || hi > 0.5 * tau * slack)
            .then(|| format!("window [{lo}, {hi}] must lie inside [2π, {}]", 0.5 * tau))
    };
    match reason {
        Some(reason) => Err(Error::WindowTooNarrow { reason }),
        None => Ok(()),
    }
}

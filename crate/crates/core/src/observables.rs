//! Density-matrix snapshots, purity, coherence length and decoherence reports.
//!
//! The reduced density matrix in the center coordinate q = (x + y)/2σ₀ and
//! the separation r = (x − y)/σ₀ has magnitude
//! √(P/π)·exp[−P(q − q_c)²]·exp[−F r²]; its phase is not tracked.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fitting::{fit_decay_rate, LinearFit};
use crate::kernels::{coefficients, CoefficientSet, KernelSource};
use crate::params::{relaxation_time, BathParameters, InitialState, RegimeKind};
use crate::quadrature::{integrate_moments, KernelMethod, QuadratureConfig};

/// Default number of grid points along each snapshot axis.
pub const DEFAULT_GRID_POINTS: usize = 257;

/// Default half-width of the snapshot grids in standard deviations.
pub const DEFAULT_GRID_SIGMAS: f64 = 6.0;

/// Value of a cutoff-sensitive quantity together with the cutoff used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffValue {
    pub value: f64,
    pub lambda_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotGrid {
    pub q_points: usize,
    pub r_points: usize,
    /// Half-width in units of the Gaussian standard deviation on each axis.
    pub sigmas: f64,
}

impl Default for SnapshotGrid {
    fn default() -> Self {
        Self {
            q_points: DEFAULT_GRID_POINTS,
            r_points: DEFAULT_GRID_POINTS,
            sigmas: DEFAULT_GRID_SIGMAS,
        }
    }
}

impl SnapshotGrid {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("q_points", self.q_points), ("r_points", self.r_points)] {
            if n < 3 {
                return Err(Error::InvalidParameter {
                    name,
                    value: n as f64,
                    reason: "grid needs at least 3 points",
                });
            }
        }
        if !(self.sigmas > 0.0 && self.sigmas.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigmas",
                value: self.sigmas,
                reason: "must be positive and finite",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySnapshot {
    pub theta: f64,
    pub q_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    /// |ρ(q, r)| indexed as `magnitude[iq][ir]`.
    pub magnitude: Vec<Vec<f64>>,
    pub p: f64,
    pub f: f64,
    pub center: f64,
    pub coefficients: CoefficientSet,
}

/// Metadata written alongside snapshot grids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotHeader {
    pub theta: f64,
    pub p: f64,
    pub f: f64,
    pub center: f64,
    pub purity: f64,
    pub params: BathParameters,
    pub state: InitialState,
    pub s: f64,
    pub method: KernelMethod,
    pub lambda_c: f64,
    pub q_points: usize,
    pub r_points: usize,
}

fn uniform(center: f64, half: f64, n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| center + half * (2.0 * k as f64 - m) / m)
        .collect()
}

/// Gaussian density-matrix magnitude for given P, F and center.
pub fn density_magnitude(p: f64, f: f64, center: f64, q: f64, r: f64) -> f64 {
    (p / PI).sqrt() * (-p * (q - center).powi(2) - f * r * r).exp()
}

/// Classical damped trajectory from the origin with momentum p̃:
/// 2p̃·e^{−Rθ}·sin(Sθ)/S (sinh when overdamped).
pub fn packet_center(theta: f64, params: &BathParameters, state: &InitialState) -> Result<f64> {
    let regime = params.regime();
    let r = params.damping();
    let s = regime.s;
    let p = state.momentum();
    let u = (-r * theta).exp();
    match regime.kind {
        RegimeKind::Underdamped => Ok(2.0 * p * u * (s * theta).sin() / s),
        RegimeKind::Overdamped => {
            // e^{−Rθ}sinh(Sθ) = [e^{−(R−S)θ} − e^{−(R+S)θ}]/2 with R − S = 1/(R + S).
            let slow = (-theta / (r + s)).exp();
            let fast = (-(r + s) * theta).exp();
            Ok(p * (slow - fast) / s)
        }
        RegimeKind::Critical => Ok(2.0 * p * theta * u),
    }
}

/// |ρ(q, r, θ)| on a grid centred on the packet.
pub fn density_snapshot(
    theta: f64,
    params: &BathParameters,
    state: &InitialState,
    source: &KernelSource,
    grid: &SnapshotGrid,
) -> Result<DensitySnapshot> {
    grid.validate()?;
    let c = coefficients(theta, params, state, source)?;
    let center = packet_center(theta, params, state)?;
    let q_half = grid.sigmas / (2.0 * c.p).sqrt();
    let r_half = grid.sigmas / (2.0 * c.f).sqrt();
    let q_grid = uniform(center, q_half, grid.q_points);
    let r_grid = uniform(0.0, r_half, grid.r_points);
    let magnitude = q_grid
        .iter()
        .map(|&q| {
            r_grid
                .iter()
                .map(|&r| density_magnitude(c.p, c.f, center, q, r))
                .collect()
        })
        .collect();
    Ok(DensitySnapshot {
        theta,
        q_grid,
        r_grid,
        magnitude,
        p: c.p,
        f: c.f,
        center,
        coefficients: c,
    })
}

impl DensitySnapshot {
    pub fn header(&self, params: &BathParameters, state: &InitialState) -> SnapshotHeader {
        SnapshotHeader {
            theta: self.theta,
            p: self.p,
            f: self.f,
            center: self.center,
            purity: self.coefficients.purity(),
            params: *params,
            state: *state,
            s: self.coefficients.regime.s,
            method: self.coefficients.method,
            lambda_c: self.coefficients.lambda_c,
            q_points: self.q_grid.len(),
            r_points: self.r_grid.len(),
        }
    }

    /// ∫ρ(q, 0)dq by the trapezoid rule.
    pub fn grid_trace(&self) -> f64 {
        let mid = self.r_grid.len() / 2;
        let column: Vec<f64> = self.magnitude.iter().map(|row| row[mid]).collect();
        trapezoid(&column, spacing(&self.q_grid))
    }

    /// Tr ρ² = ∫∫|ρ|² dq dr by the trapezoid rule.
    pub fn grid_purity(&self) -> f64 {
        let dr = spacing(&self.r_grid);
        let rows: Vec<f64> = self
            .magnitude
            .iter()
            .map(|row| {
                let sq: Vec<f64> = row.iter().map(|m| m * m).collect();
                trapezoid(&sq, dr)
            })
            .collect();
        trapezoid(&rows, spacing(&self.q_grid))
    }
}

fn spacing(grid: &[f64]) -> f64 {
    (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// s(θ) = ½√(P/F).
pub fn purity(theta: f64, params: &BathParameters, state: &InitialState, source: &KernelSource) -> Result<f64> {
    let c = coefficients(theta, params, state, source)?;
    if !(c.f > 0.0) {
        return Err(Error::SingularTime { theta });
    }
    Ok(c.purity())
}

/// d_C/σ₀ = (−d²I/dθ²|₀/π)^{−1/2}.
pub fn coherence_length(params: &BathParameters, cfg: &QuadratureConfig) -> Result<CutoffValue> {
    let m = integrate_moments(0.0, params, cfg)?;
    Ok(CutoffValue {
        value: (-m.d2i0 / PI).powf(-0.5),
        lambda_c: params.cutoff(),
    })
}

/// s_∞ = (−I(0)·d²I/dθ²|₀/π²)^{−1/2}.
pub fn asymptotic_purity(params: &BathParameters, cfg: &QuadratureConfig) -> Result<CutoffValue> {
    let m = integrate_moments(0.0, params, cfg)?;
    Ok(CutoffValue {
        value: (-m.i0 * m.d2i0 / (PI * PI)).powf(-0.5),
        lambda_c: params.cutoff(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceReport {
    /// Fitted decay rate of F·r² in units of ω₀.
    pub gamma: f64,
    pub tau_d_over_tau_r: f64,
    pub d_c_over_sigma0: f64,
    pub s_inf: f64,
    pub fit_window: [f64; 2],
    pub fit_residual: f64,
    pub fit: LinearFit,
    pub lambda_c: f64,
}

/// Samples F(θ)·r² at the given times.
pub fn exponent_series(
    times: &[f64],
    params: &BathParameters,
    state: &InitialState,
    r: f64,
    source: &KernelSource,
) -> Result<Vec<(f64, f64)>> {
    times
        .iter()
        .map(|&t| Ok((t, coefficients(t, params, state, source)?.f * r * r)))
        .collect()
}

/// Fits the decay of the off-diagonal element at distance r over `times`
/// and collects the cutoff-dependent long-time quantities.
pub fn decoherence_report(
    params: &BathParameters,
    state: &InitialState,
    r: f64,
    times: &[f64],
    source: &KernelSource,
    cfg: &QuadratureConfig,
) -> Result<DecoherenceReport> {
    let series = exponent_series(times, params, state, r, source)?;
    let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fit = fit_decay_rate(&series, [lo, hi])?;
    let gamma = fit.slope;
    Ok(DecoherenceReport {
        gamma,
        tau_d_over_tau_r: 1.0 / (gamma * relaxation_time(params)?),
        d_c_over_sigma0: coherence_length(params, cfg)?.value,
        s_inf: asymptotic_purity(params, cfg)?.value,
        fit_window: fit.window,
        fit_residual: fit.residual_rms,
        fit,
        lambda_c: params.cutoff(),
    })
}

//! Acceptance suite: every closed-form result checked against an
//! independent numerical evaluation.
//!
//! Each criterion reports a normalized deviation, the worst measured error
//! divided by its tolerance, so a value at or below one passes.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::fitting::{fit_decay_rate, fit_log_divergence, least_squares, strong_window_times, weak_window_times};
use crate::kernels::{a_closed_form, coefficients, residue_i_high_t, zero_t_i_strong, KernelSource};
use crate::observables::{asymptotic_purity, coherence_length, exponent_series};
use crate::params::{relaxation_time, BathParameters, InitialState};
use crate::quadrature::{
    integrate_a_direct_all, integrate_i, integrate_moments, second_derivative_i_at_zero, QuadratureConfig,
    ThermalWeight,
};
use crate::regimes::{
    purity_slope, tau_d_strong, tau_d_weak, weak_rate, RegimeTag, Validity,
};

/// Number of acceptance criteria.
pub const CRITERIA: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationConfig {
    /// Multiplies every tolerance; values below one tighten the suite.
    pub tolerance_scale: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            tolerance_scale: 1.0,
            quadrature: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    /// Worst measured error over its tolerance.
    pub deviation: f64,
    pub details: String,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {}: deviation {:.3e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.deviation,
            self.details
        )
    }
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "dual-path kernel equivalence",
        2 => "initial-condition exactness",
        3 => "high-temperature residue formula",
        4 => "weak-damping decoherence rate",
        5 => "zero-squeezing robustness",
        6 => "weak-damping figure shapes",
        7 => "strong-damping decoherence",
        8 => "residual coherence and asymptotic purity",
        9 => "logarithmic cutoff divergence",
        10 => "zero-temperature special-function form",
        11 => "purity slope formulas",
        12 => "coherence-gain sign check",
        _ => "unknown criterion",
    }
}

/// Accumulates normalized deviations and a readable trail of measurements.
struct Tally {
    worst: f64,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            worst: 0.0,
            notes: Vec::new(),
        }
    }

    /// Records |measured − expected| against a relative tolerance.
    fn relative(&mut self, label: &str, measured: f64, expected: f64, tol: f64) {
        let err = ((measured - expected) / expected).abs();
        self.ratio(err / tol);
        self.notes
            .push(format!("{label} {measured:.6e} vs {expected:.6e} (rel {err:.2e})"));
    }

    fn ratio(&mut self, r: f64) {
        self.worst = if r.is_nan() { f64::INFINITY } else { self.worst.max(r) };
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    fn require(&mut self, label: &str, ok: bool) {
        if !ok {
            self.worst = f64::INFINITY;
        }
        self.notes.push(format!("{label}: {}", if ok { "yes" } else { "no" }));
    }
}

fn params(r: f64, kappa: f64, cutoff: f64) -> Result<BathParameters> {
    BathParameters::new(r, kappa, cutoff)
}

fn c1(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    let q = &cfg.quadrature;
    let mut worst_rel: f64 = 0.0;
    for &r in &[0.02, 0.05, 0.3] {
        for &kappa in &[0.02, 0.5, 5.0] {
            let p = params(r, kappa, 200.0)?;
            for &theta in &[0.5, 2.0, 5.0, 10.0] {
                let closed = a_closed_form(&p, &integrate_moments(theta, &p, q)?)?;
                let direct = integrate_a_direct_all(theta, &p, q)?;
                for k in 0..3 {
                    let diff = (closed[k] - direct[k]).abs();
                    let allowed = (1e-4 * direct[k].abs()).max(1e-8) * cfg.tolerance_scale;
                    t.ratio(diff / allowed);
                    worst_rel = worst_rel.max(diff / direct[k].abs().max(1e-300));
                }
            }
        }
    }
    t.note(format!("36 parameter points, worst relative gap {worst_rel:.2e}"));
    Ok(())
}

fn c2(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    let p = params(0.05, 0.05, 1e3)?;
    let theta = 1e-6;
    for &zeta in &[0.5, 1.0, 2.0] {
        let state = InitialState::new(zeta, 0.0)?;
        let c = coefficients(theta, &p, &state, &KernelSource::Quadrature(cfg.quadrature))?;
        t.relative(&format!("F(ζ={zeta})"), c.f, 1.0 / (8.0 * zeta * zeta), 1e-4 * cfg.tolerance_scale);
        t.relative(&format!("s(ζ={zeta})"), c.purity(), 1.0, 1e-6 * cfg.tolerance_scale);
    }
    Ok(())
}

fn c3(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    let p = params(0.05, 0.01, 1e3)?;
    let q = cfg.quadrature.with_weight(ThermalWeight::HighTemperature);
    let mut worst: f64 = 0.0;
    for k in 0..=40 {
        let theta = 0.25 * k as f64;
        let quad = integrate_i(theta, &p, &q)?.i;
        let res = residue_i_high_t(theta, &p)?.i;
        worst = worst.max(((quad - res) / res).abs());
    }
    t.ratio(worst / (1e-3 * cfg.tolerance_scale));
    t.note(format!("θ ∈ [0, 10] step 0.25, max relative deviation {worst:.2e}"));
    Ok(())
}

fn c4(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    let p = params(0.01, 0.05, 1e3)?;
    let state = InitialState::coherent();
    let times: Vec<f64> = (2..=12).map(|n| n as f64 * PI).collect();
    let series = exponent_series(&times, &p, &state, 1.0, &KernelSource::Quadrature(cfg.quadrature))?;
    let fit = fit_decay_rate(&series, [times[0], times[times.len() - 1]])?;
    let closed = weak_rate(p.damping(), Validity::General.coth(p.kappa()), 1.0, 1.0);
    t.relative("Γ", fit.slope, closed, 0.1 * cfg.tolerance_scale);
    let tau_fit = 1.0 / (fit.slope * relaxation_time(&p)?);
    let tau = tau_d_weak(&p, &state, 1.0, Validity::General)?.tau_d_over_tau_r;
    t.relative("τ_D/τ_R", tau_fit, tau, 0.1 * cfg.tolerance_scale);
    Ok(())
}

fn c5(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    let closed = weak_rate(0.005, 1.0, 1.0, 1.0);
    t.require("closed-form Γ(ζ=1, coth κ → 1) is exactly zero", closed == 0.0);
    let p = params(0.005, 50.0, 1e3)?;
    let state = InitialState::coherent();
    let times = weak_window_times(&p);
    let series = exponent_series(&times, &p, &state, 1.0, &KernelSource::Quadrature(cfg.quadrature))?;
    let fit = least_squares(&series)?;
    let bound = 0.02 * p.damping() * cfg.tolerance_scale;
    t.ratio(fit.slope.abs() / bound);
    t.note(format!(
        "fitted |Γ| {:.3e} over θ ∈ [{:.3}, {:.3}], bound {bound:.1e}",
        fit.slope.abs(),
        fit.window[0],
        fit.window[1]
    ));
    Ok(())
}

/// τ_D/τ_R with r = ζ for each ζ on the grid.
fn fig_weak_curve(kappa: f64, zetas: &[f64], validity: Validity) -> Result<Vec<f64>> {
    let p = params(0.01, kappa, 1e3)?;
    zetas
        .iter()
        .map(|&z| Ok(tau_d_weak(&p, &InitialState::new(z, 0.0)?, z, validity)?.tau_d_over_tau_r))
        .collect()
}

fn c6(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    let kappas: Vec<f64> = (1..=10).map(|k| 0.01 * k as f64).collect();
    let high: Vec<f64> = kappas
        .iter()
        .map(|&k| Ok(fig_weak_curve(k, &[1.0], Validity::HighT)?[0]))
        .collect::<Result<_>>()?;
    t.require(
        "(a) high-T τ_D/τ_R strictly increasing in κ at ζ = 1",
        high.windows(2).all(|w| w[1] > w[0]),
    );

    let zetas: Vec<f64> = (0..=150).map(|k| 0.5 + 0.01 * k as f64).collect();
    let tol = 0.02 * cfg.tolerance_scale;
    let mut peaks = Vec::new();
    for &kappa in &[1.0, 2.0, 5.0] {
        let curve = fig_weak_curve(kappa, &zetas, Validity::General)?;
        let (arg, peak) = curve
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let zeta_peak = zetas[arg];
        t.ratio((zeta_peak - 1.0).abs() / tol);
        t.note(format!("(b) κ={kappa}: peak at ζ={zeta_peak:.2}, height {peak:.4e}"));
        peaks.push(peak);
    }
    t.require("(b) peak height increases with κ", peaks.windows(2).all(|w| w[1] > w[0]));
    Ok(())
}

fn c7(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    let p = params(10.0, 0.01, 1e3)?;
    let state = InitialState::coherent();
    let source = KernelSource::Quadrature(cfg.quadrature);
    let times = strong_window_times(&p);
    let series = exponent_series(&times, &p, &state, 1.0, &source)?;
    let fit = fit_decay_rate(&series, [times[0], times[times.len() - 1]])?;
    let strong = tau_d_strong(&p, &state, 1.0)?;
    t.relative("Γ", fit.slope, strong.gamma, 0.1 * cfg.tolerance_scale);
    let tau_fit = 1.0 / (fit.slope * relaxation_time(&p)?);
    t.relative("τ_D/τ_R", tau_fit, 1.0101e-4, 0.1 * cfg.tolerance_scale);
    let f_sat = coefficients(2.0 / p.damping(), &p, &state, &source)?.f;
    t.relative("F(Rθ=2)", f_sat, 1.0 / (8.0 * p.kappa()), 0.05 * cfg.tolerance_scale);
    Ok(())
}

fn c8(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    for &kappa in &[0.02f64, 0.05] {
        for &r in &[0.05f64, 10.0] {
            let cutoff = 10.0 * (1.0 / kappa).max(r);
            let p = params(r, kappa, cutoff)?;
            let d = coherence_length(&p, &cfg.quadrature)?.value;
            let s = asymptotic_purity(&p, &cfg.quadrature)?.value;
            t.relative(&format!("d_C(κ={kappa},R={r})"), d, kappa.sqrt(), 0.05 * cfg.tolerance_scale);
            t.relative(&format!("s∞(κ={kappa},R={r})"), s, kappa, 0.1 * cfg.tolerance_scale);
        }
    }
    Ok(())
}

fn c9(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    let r = 10.0;
    let q = cfg.quadrature.with_weight(ThermalWeight::ZeroTemperature);
    let cutoffs = [1e2, 1e3, 1e4, 1e5];
    let mut samples = Vec::new();
    let mut lengths = Vec::new();
    let mut purities = Vec::new();
    for &c in &cutoffs {
        let p = params(r, 100.0, c)?;
        samples.push((c, -second_derivative_i_at_zero(&p, &q)?));
        lengths.push(coherence_length(&p, &q)?.value);
        purities.push(asymptotic_purity(&p, &q)?.value);
    }
    let fit = fit_log_divergence(&samples)?;
    t.relative("slope", fit.slope, 4.0 * r, 0.1 * cfg.tolerance_scale);
    t.require(&format!("R² = {:.6} > 0.999", fit.r_squared), fit.r_squared > 0.999);
    for (name, values) in [("d_C", &lengths), ("s∞", &purities)] {
        for k in 1..cutoffs.len() {
            let ratio = values[k] / values[0];
            let expected = (cutoffs[0].ln() / cutoffs[k].ln()).sqrt();
            t.relative(&format!("{name}({:.0e})/{name}(1e2)", cutoffs[k]), ratio, expected, 0.1 * cfg.tolerance_scale);
        }
    }
    Ok(())
}

fn c10(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    let p = params(10.0, 100.0, 1e4)?;
    let q = cfg.quadrature.with_weight(ThermalWeight::ZeroTemperature);
    for &theta in &[0.2, 1.0, 5.0] {
        let quad = integrate_i(theta, &p, &q)?.i;
        let closed = zero_t_i_strong(theta, &p)?.i;
        t.relative(&format!("I({theta})"), closed, quad, 1e-2 * cfg.tolerance_scale);
    }
    Ok(())
}

/// Fitted ds/d(Rθ) of the purity over the given times.
fn purity_rate(p: &BathParameters, state: &InitialState, times: &[f64], source: &KernelSource) -> Result<f64> {
    let series: Vec<(f64, f64)> = times
        .iter()
        .map(|&th| Ok((p.damping() * th, coefficients(th, p, state, source)?.purity())))
        .collect::<Result<_>>()?;
    Ok(fit_decay_rate(&series, [series[0].0, series[series.len() - 1].0])?.slope)
}

fn c11(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    let weak = params(0.005, 0.05, 1e3)?;
    let state = InitialState::new(1.2, 0.0)?;
    let times: Vec<f64> = (1..=8).map(|k| k as f64 * PI / 8.0).collect();
    let fitted = purity_rate(&weak, &state, &times, &KernelSource::Quadrature(cfg.quadrature))?;
    let expected = purity_slope(&weak, &state, RegimeTag::Weak)?;
    t.relative("weak ds/d(γt)", fitted, expected, 0.05 * cfg.tolerance_scale);

    let strong = params(10.0, 0.01, 1e3)?;
    let state = InitialState::coherent();
    let times: Vec<f64> = (1..=10).map(|k| 2e-6 * k as f64).collect();
    let fitted = purity_rate(&strong, &state, &times, &KernelSource::Residue)?;
    let expected = purity_slope(&strong, &state, RegimeTag::Strong)?;
    t.relative("strong ds/d(γt)", fitted, expected, 0.1 * cfg.tolerance_scale);
    Ok(())
}

fn c12(cfg: &ValidationConfig, t: &mut Tally) -> Result<()> {
    let p = params(10.0, 0.05, 1e3)?;
    let state = InitialState::new(0.1, 0.0)?;
    let times = strong_window_times(&p);
    let series = exponent_series(&times, &p, &state, 1.0, &KernelSource::Quadrature(cfg.quadrature))?;
    let fit = least_squares(&series)?;
    let first = series[0].1;
    let last = series[series.len() - 1].1;
    t.note(format!("F from {first:.4e} to {last:.4e}, fitted slope {:.4e}", fit.slope));
    t.require("F decreases over Rθ ∈ [0.02, 0.5]", fit.slope < 0.0 && last < first);
    t.require("coherence-gain flag set", tau_d_strong(&p, &state, 1.0)?.coherence_gain);
    Ok(())
}

/// Runs one criterion; numerical errors count as failures.
pub fn run_criterion(id: usize, cfg: &ValidationConfig) -> CriterionOutcome {
    let mut tally = Tally::new();
    let run = match id {
        1 => c1(cfg, &mut tally),
        2 => c2(cfg, &mut tally),
        3 => c3(cfg, &mut tally),
        4 => c4(cfg, &mut tally),
        5 => c5(cfg, &mut tally),
        6 => c6(cfg, &mut tally),
        7 => c7(cfg, &mut tally),
        8 => c8(cfg, &mut tally),
        9 => c9(cfg, &mut tally),
        10 => c10(cfg, &mut tally),
        11 => c11(cfg, &mut tally),
        12 => c12(cfg, &mut tally),
        _ => {
            tally.require("criterion exists", false);
            Ok(())
        }
    };
    if let Err(e) = run {
        tally.worst = f64::INFINITY;
        tally.note(format!("error: {e}"));
    }
    CriterionOutcome {
        id,
        title: title(id),
        passed: tally.worst <= 1.0,
        deviation: tally.worst,
        details: tally.notes.join("; "),
    }
}

pub fn run_all(cfg: &ValidationConfig) -> Vec<CriterionOutcome> {
    (1..=CRITERIA).map(|id| run_criterion(id, cfg)).collect()
}

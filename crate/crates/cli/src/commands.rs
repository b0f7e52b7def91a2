//! Table builders for each subcommand.

use packet_decoherence::fitting::fit_log_divergence;
use packet_decoherence::observables::{
    asymptotic_purity, coherence_length, density_snapshot, packet_center, SnapshotGrid,
};
use packet_decoherence::quadrature::second_derivative_i_at_zero;
use packet_decoherence::regimes::{tau_d_strong, tau_d_weak, Validity};
use packet_decoherence::validation::{run_criterion, CriterionOutcome, ValidationConfig, CRITERIA};
use packet_decoherence::{coefficients, BathParameters, InitialState, KernelSource, RegimeKind};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{sorted, GridPoint, RunConfig};
use crate::failure::Failure;
use crate::table::{Cell, Table};

const PROVENANCE: [&str; 6] = ["R", "S", "kappa", "zeta", "r", "lambda_c"];

fn with_provenance(extra: &[&'static str]) -> Vec<&'static str> {
    PROVENANCE.iter().copied().chain(extra.iter().copied()).collect()
}

fn provenance(params: &BathParameters, zeta: f64, r: f64) -> Vec<Cell> {
    vec![
        params.damping().into(),
        params.regime().s.into(),
        params.kappa().into(),
        zeta.into(),
        r.into(),
        params.cutoff().into(),
    ]
}

fn regime_name(params: &BathParameters) -> &'static str {
    match params.regime().kind {
        RegimeKind::Underdamped => "underdamped",
        RegimeKind::Overdamped => "overdamped",
        RegimeKind::Critical => "critical",
    }
}

fn weight_name(cfg: &RunConfig, kappa: f64) -> &'static str {
    use packet_decoherence::ThermalWeight::*;
    match cfg.quadrature_config().weight.resolve(kappa) {
        Auto | Exact => "exact",
        HighTemperature => "high_temperature",
        ZeroTemperature => "zero_temperature",
    }
}

/// Approximations in force for a row, joined by ';'.
fn gates(labels: &[&'static str]) -> String {
    if labels.is_empty() {
        "none".into()
    } else {
        labels.join(";")
    }
}

fn source_gates(cfg: &RunConfig, params: &BathParameters) -> Vec<&'static str> {
    let q = cfg.quadrature_config();
    match cfg.source() {
        KernelSource::Quadrature(_) if q.weight.is_proxy(params.kappa()) => vec!["zero_t_proxy"],
        KernelSource::Quadrature(_) => vec![],
        KernelSource::Residue => vec!["high_t"],
        KernelSource::Appendix(_) => vec!["zero_t"],
    }
}

/// F, P, s and the packet center along the θ grid for every grid point.
pub fn evolve(cfg: &RunConfig) -> Result<Table, Failure> {
    let source = cfg.source();
    let thetas = cfg.thetas();
    let jobs: Vec<(GridPoint, f64)> = cfg
        .grid_points()?
        .into_iter()
        .flat_map(|g| thetas.iter().map(move |&t| (g, t)))
        .collect();
    let rows: Vec<Vec<Cell>> = jobs
        .par_iter()
        .map(|(g, theta)| -> Result<Vec<Cell>, Failure> {
            let c = coefficients(*theta, &g.params, &g.state, &source)?;
            let center = packet_center(*theta, &g.params, &g.state)?;
            let mut labels = source_gates(cfg, &g.params);
            if c.regularized {
                labels.push("regularized");
            }
            let mut row = provenance(&g.params, g.state.squeezing(), g.distance);
            row.extend([
                g.state.momentum().into(),
                (*theta).into(),
                c.f.into(),
                c.p.into(),
                c.purity().into(),
                center.into(),
                (c.f * g.distance * g.distance).into(),
                regime_name(&g.params).into(),
                c.method.as_str().into(),
                weight_name(cfg, g.params.kappa()).into(),
                gates(&labels).into(),
            ]);
            Ok(row)
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&with_provenance(&[
        "p0", "theta", "F", "P", "s", "center", "exponent", "regime", "method", "weight", "gates",
    ]));
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Weak-damping τ_D/τ_R with r = ζ for the high-temperature and general forms.
pub fn fig_weak(cfg: &RunConfig) -> Result<Table, Failure> {
    let columns = with_provenance(&[
        "validity",
        "coth_kappa",
        "phi_avg",
        "gamma",
        "tau_d_over_tau_r",
        "divergent",
        "method",
        "gates",
        "status",
    ]);
    let mut jobs = Vec::new();
    for validity in [Validity::HighT, Validity::General] {
        for &r in &sorted(&cfg.bath.damping) {
            for &kappa in &sorted(&cfg.bath.kappa) {
                for &cutoff in &sorted(&cfg.bath.lambda_c) {
                    let params = BathParameters::new(r, kappa, cutoff)?;
                    for &zeta in &sorted(&cfg.state.squeezing) {
                        jobs.push((validity, params, InitialState::new(zeta, cfg.state.momentum)?));
                    }
                }
            }
        }
    }
    let rows: Vec<Vec<Cell>> = jobs
        .par_iter()
        .map(|(validity, params, state)| {
            let zeta = state.squeezing();
            let mut row = provenance(params, zeta, zeta);
            row.push(validity.as_str().into());
            row.push(validity.coth(params.kappa()).into());
            let label = match validity {
                Validity::HighT => "high_t",
                Validity::LowTUpperBound => "low_t_upper_bound",
                Validity::General => "general_coth",
            };
            match tau_d_weak(params, state, zeta, *validity) {
                Ok(w) => row.extend([
                    w.phi_avg.into(),
                    w.gamma.into(),
                    w.tau_d_over_tau_r.into(),
                    w.divergent.into(),
                    "closed_form".into(),
                    gates(&["weak_damping", label]).into(),
                    "ok".into(),
                ]),
                Err(e) => row.extend([
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    false.into(),
                    "closed_form".into(),
                    gates(&["weak_damping", label]).into(),
                    e.to_string().into(),
                ]),
            }
            row
        })
        .collect();
    let mut table = Table::new(&columns);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Linearized strong-damping decay rates and τ_D/τ_R.
pub fn fig_strong(cfg: &RunConfig) -> Result<Table, Failure> {
    let columns = with_provenance(&[
        "f_linear_slope",
        "gamma",
        "tau_d_over_tau_r",
        "coherence_gain",
        "a1",
        "a2",
        "a3",
        "method",
        "gates",
        "status",
    ]);
    let rows: Vec<Vec<Cell>> = cfg
        .grid_points()?
        .par_iter()
        .map(|g| {
            let mut row = provenance(&g.params, g.state.squeezing(), g.distance);
            match tau_d_strong(&g.params, &g.state, g.distance) {
                Ok(s) => row.extend([
                    s.f_linear_slope.into(),
                    s.gamma.into(),
                    s.tau_d_over_tau_r.into(),
                    s.coherence_gain.into(),
                    s.a_expansion[0].into(),
                    s.a_expansion[1].into(),
                    s.a_expansion[2].into(),
                ]),
                Err(e) => {
                    row.extend(std::iter::repeat_with(|| Cell::Float(f64::NAN)).take(3));
                    row.push(false.into());
                    row.extend(std::iter::repeat_with(|| Cell::Float(f64::NAN)).take(3));
                    row.push("closed_form".into());
                    row.push(gates(&["strong_damping", "high_t"]).into());
                    row.push(e.to_string().into());
                    return row;
                }
            }
            row.extend([
                "closed_form".into(),
                gates(&["strong_damping", "high_t"]).into(),
                "ok".into(),
            ]);
            row
        })
        .collect();
    let mut table = Table::new(&columns);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

#[derive(Debug, Serialize)]
pub struct SnapshotMeta {
    #[serde(flatten)]
    pub header: packet_decoherence::observables::SnapshotHeader,
    pub damping: f64,
    pub s_regime: f64,
    pub kappa: f64,
    pub zeta: f64,
    pub regime: &'static str,
    pub weight: &'static str,
    pub gates: String,
    pub regularized: bool,
}

/// |ρ(q, r)| on the configured grid at a single θ.
pub fn snapshot(cfg: &RunConfig) -> Result<(SnapshotMeta, Table), Failure> {
    let points = cfg.grid_points()?;
    if points.len() != 1 {
        return Err(Failure::config(format!(
            "snapshot needs a single parameter set, the grids give {}",
            points.len()
        )));
    }
    let g = points[0];
    let s = &cfg.snapshot;
    let grid = SnapshotGrid {
        q_points: s.q_points,
        r_points: s.r_points,
        sigmas: s.sigmas,
    };
    let snap = density_snapshot(s.theta, &g.params, &g.state, &cfg.source(), &grid)?;
    let mut labels = source_gates(cfg, &g.params);
    if snap.coefficients.regularized {
        labels.push("regularized");
    }
    let meta = SnapshotMeta {
        header: snap.header(&g.params, &g.state),
        damping: g.params.damping(),
        s_regime: g.params.regime().s,
        kappa: g.params.kappa(),
        zeta: g.state.squeezing(),
        regime: regime_name(&g.params),
        weight: weight_name(cfg, g.params.kappa()),
        gates: gates(&labels),
        regularized: snap.coefficients.regularized,
    };
    let mut table = Table::new(&["theta", "q", "r", "magnitude", "lambda_c"]);
    for (iq, q) in snap.q_grid.iter().enumerate() {
        for (ir, r) in snap.r_grid.iter().enumerate() {
            table.push(vec![
                s.theta.into(),
                (*q).into(),
                (*r).into(),
                snap.magnitude[iq][ir].into(),
                g.params.cutoff().into(),
            ]);
        }
    }
    Ok((meta, table))
}

/// −d²I/dθ²|₀, d_C/σ₀ and s_∞ against λ_C with a fitted log slope per (R, κ).
pub fn divergence(cfg: &RunConfig) -> Result<Table, Failure> {
    let q = cfg.quadrature_config();
    let cutoffs = sorted(&cfg.bath.lambda_c);
    let mut table = Table::new(&[
        "R",
        "S",
        "kappa",
        "lambda_c",
        "neg_d2i0",
        "d_c_over_sigma0",
        "s_inf",
        "slope",
        "intercept",
        "r_squared",
        "weight",
        "gates",
    ]);
    for &r in &sorted(&cfg.bath.damping) {
        for &kappa in &sorted(&cfg.bath.kappa) {
            let samples: Vec<(BathParameters, f64, f64, f64)> = cutoffs
                .par_iter()
                .map(|&c| -> Result<_, Failure> {
                    let p = BathParameters::new(r, kappa, c)?;
                    Ok((
                        p,
                        -second_derivative_i_at_zero(&p, &q)?,
                        coherence_length(&p, &q)?.value,
                        asymptotic_purity(&p, &q)?.value,
                    ))
                })
                .collect::<Result<_, _>>()?;
            let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.0.cutoff(), s.1)).collect();
            let fit = fit_log_divergence(&pairs)?;
            for (p, neg, d, s) in samples {
                let proxy = if q.weight.is_proxy(kappa) { vec!["zero_t_proxy"] } else { vec![] };
                table.push(vec![
                    r.into(),
                    p.regime().s.into(),
                    kappa.into(),
                    p.cutoff().into(),
                    neg.into(),
                    d.into(),
                    s.into(),
                    fit.slope.into(),
                    fit.intercept.into(),
                    fit.r_squared.into(),
                    weight_name(cfg, kappa).into(),
                    gates(&proxy).into(),
                ]);
            }
        }
    }
    Ok(table)
}

/// Runs the acceptance criteria; returns the report and the failed ids.
pub fn validate(cfg: &RunConfig) -> (Table, Vec<CriterionOutcome>) {
    let vcfg = ValidationConfig {
        tolerance_scale: cfg.validate.tolerance_scale,
        quadrature: cfg.quadrature_config(),
    };
    let mut ids = cfg.validate.criteria.clone();
    if ids.is_empty() {
        ids = (1..=CRITERIA).collect();
    }
    ids.sort_unstable();
    ids.dedup();
    let outcomes: Vec<CriterionOutcome> = ids.par_iter().map(|&id| run_criterion(id, &vcfg)).collect();
    let mut table = Table::new(&["id", "title", "passed", "deviation", "tolerance_scale", "details"]);
    for o in &outcomes {
        table.push(vec![
            o.id.into(),
            o.title.into(),
            o.passed.into(),
            o.deviation.into(),
            vcfg.tolerance_scale.into(),
            o.details.clone().into(),
        ]);
    }
    let failed = outcomes.into_iter().filter(|o| !o.passed).collect();
    (table, failed)
}

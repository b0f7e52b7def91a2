//! Run configuration: a TOML file merged with command-line overrides.

use std::path::Path;

use packet_decoherence::quadrature::{QuadratureConfig, ThermalWeight};
use packet_decoherence::{BathParameters, InitialState, KernelSource, OffDiagonalDistance};
use serde::Deserialize;

use crate::failure::Failure;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub bath: BathGrid,
    pub state: StateGrid,
    pub time: TimeGrid,
    pub quadrature: QuadratureSection,
    pub snapshot: SnapshotSection,
    pub validate: ValidateSection,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BathGrid {
    pub damping: Vec<f64>,
    pub kappa: Vec<f64>,
    pub lambda_c: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct StateGrid {
    pub squeezing: Vec<f64>,
    pub momentum: f64,
    /// Off-diagonal distances r; `fig-weak` ignores this and uses r = ζ.
    pub distance: Vec<f64>,
}

/// Either an explicit list of θ values or a uniform grid.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub theta: Option<Vec<f64>>,
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SourceChoice {
    Quadrature,
    Residue,
    Appendix,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum WeightChoice {
    Auto,
    Exact,
    HighTemperature,
    ZeroTemperature,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub oscillation_splitting: bool,
    pub weight: WeightChoice,
    pub source: SourceChoice,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SnapshotSection {
    pub theta: f64,
    pub q_points: usize,
    pub r_points: usize,
    pub sigmas: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub tolerance_scale: f64,
    /// Criteria to run; empty means all.
    pub criteria: Vec<usize>,
}

impl Default for BathGrid {
    fn default() -> Self {
        Self {
            damping: vec![0.05],
            kappa: vec![0.05],
            lambda_c: vec![1e3],
        }
    }
}

impl Default for StateGrid {
    fn default() -> Self {
        Self {
            squeezing: vec![1.0],
            momentum: 0.0,
            distance: vec![1.0],
        }
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            theta: None,
            start: 0.0,
            end: 20.0 * std::f64::consts::PI,
            points: 201,
        }
    }
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        Self {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_subdivisions: q.max_subdivisions,
            oscillation_splitting: q.oscillation_splitting,
            weight: WeightChoice::Auto,
            source: SourceChoice::Quadrature,
        }
    }
}

impl Default for SnapshotSection {
    fn default() -> Self {
        let g = packet_decoherence::observables::SnapshotGrid::default();
        Self {
            theta: 1.0,
            q_points: g.q_points,
            r_points: g.r_points,
            sigmas: g.sigmas,
        }
    }
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self {
            tolerance_scale: 1.0,
            criteria: Vec::new(),
        }
    }
}

/// One point of the bath and state grids.
#[derive(Debug, Clone, Copy)]
pub struct GridPoint {
    pub params: BathParameters,
    pub state: InitialState,
    pub distance: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
    }

    pub fn quadrature_config(&self) -> QuadratureConfig {
        let q = &self.quadrature;
        QuadratureConfig {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_subdivisions: q.max_subdivisions,
            oscillation_splitting: q.oscillation_splitting,
            weight: match q.weight {
                WeightChoice::Auto => ThermalWeight::Auto,
                WeightChoice::Exact => ThermalWeight::Exact,
                WeightChoice::HighTemperature => ThermalWeight::HighTemperature,
                WeightChoice::ZeroTemperature => ThermalWeight::ZeroTemperature,
            },
        }
    }

    pub fn source(&self) -> KernelSource {
        let cfg = self.quadrature_config();
        match self.quadrature.source {
            SourceChoice::Quadrature => KernelSource::Quadrature(cfg),
            SourceChoice::Residue => KernelSource::Residue,
            SourceChoice::Appendix => KernelSource::Appendix(cfg),
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        if let Some(list) = &self.time.theta {
            return sorted(list);
        }
        let t = &self.time;
        if t.points == 1 {
            return vec![t.start];
        }
        let m = (t.points - 1) as f64;
        (0..t.points)
            .map(|k| t.start + (t.end - t.start) * k as f64 / m)
            .collect()
    }

    /// Checks every grid and parameter before any computation starts.
    pub fn validate(&self) -> Result<(), Failure> {
        let grids: [(&str, &[f64]); 5] = [
            ("bath.damping", &self.bath.damping),
            ("bath.kappa", &self.bath.kappa),
            ("bath.lambda_c", &self.bath.lambda_c),
            ("state.squeezing", &self.state.squeezing),
            ("state.distance", &self.state.distance),
        ];
        for (name, grid) in grids {
            if grid.is_empty() {
                return Err(Failure::config(format!("grid `{name}` is empty")));
            }
        }
        if matches!(&self.time.theta, Some(list) if list.is_empty()) {
            return Err(Failure::config("grid `time.theta` is empty"));
        }
        if self.time.theta.is_none() {
            let t = &self.time;
            if t.points == 0 {
                return Err(Failure::config("`time.points` must be positive"));
            }
            if !(t.start.is_finite() && t.end.is_finite() && t.start >= 0.0 && t.end >= t.start) {
                return Err(Failure::config(format!(
                    "time range [{}, {}] must satisfy 0 ≤ start ≤ end",
                    t.start, t.end
                )));
            }
        }
        if let Some(bad) = self.thetas().iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(Failure::config(format!("θ = {bad} must be finite and non-negative")));
        }
        self.quadrature_config().validate()?;
        self.grid_points()?;
        for &r in &self.state.distance {
            OffDiagonalDistance::new(r)?;
        }
        let s = &self.snapshot;
        if !(s.theta >= 0.0 && s.theta.is_finite()) {
            return Err(Failure::config(format!("snapshot.theta = {} must be finite and non-negative", s.theta)));
        }
        packet_decoherence::observables::SnapshotGrid {
            q_points: s.q_points,
            r_points: s.r_points,
            sigmas: s.sigmas,
        }
        .validate()?;
        if !(self.validate.tolerance_scale > 0.0 && self.validate.tolerance_scale.is_finite()) {
            return Err(Failure::config(format!(
                "validate.tolerance_scale = {} must be positive",
                self.validate.tolerance_scale
            )));
        }
        let n = packet_decoherence::validation::CRITERIA;
        if let Some(bad) = self.validate.criteria.iter().find(|&&id| id == 0 || id > n) {
            return Err(Failure::config(format!("criterion {bad} does not exist (1..={n})")));
        }
        Ok(())
    }

    /// Cartesian product of the bath and state grids in sorted order
    /// (R, κ, λ_C, ζ, r).
    pub fn grid_points(&self) -> Result<Vec<GridPoint>, Failure> {
        let mut out = Vec::new();
        for &r in &sorted(&self.bath.damping) {
            for &kappa in &sorted(&self.bath.kappa) {
                for &cutoff in &sorted(&self.bath.lambda_c) {
                    let params = BathParameters::new(r, kappa, cutoff)?;
                    for &zeta in &sorted(&self.state.squeezing) {
                        let state = InitialState::new(zeta, self.state.momentum)?;
                        for &distance in &sorted(&self.state.distance) {
                            out.push(GridPoint {
                                params,
                                state,
                                distance,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Sorted copy with duplicates removed.
pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_file() {
        let cfg: RunConfig = toml::from_str(
            r#"
            [bath]
            damping = [0.3, 0.05]
            [quadrature]
            weight = "zero-temperature"
            source = "residue"
            [time]
            theta = [2.0, 1.0]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.bath.kappa, vec![0.05]);
        assert_eq!(cfg.quadrature.weight, WeightChoice::ZeroTemperature);
        assert_eq!(cfg.thetas(), vec![1.0, 2.0]);
        assert_eq!(cfg.grid_points().unwrap()[0].params.damping(), 0.05);
        assert!(matches!(cfg.source(), KernelSource::Residue));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("[bath]\ngamma = [1.0]").is_err());
    }

    #[test]
    fn empty_and_invalid_grids() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.bath.kappa.clear();
        assert_eq!(cfg.validate().unwrap_err().code, 2);
        let mut cfg = RunConfig::default();
        cfg.bath.kappa = vec![-0.1];
        assert_eq!(cfg.validate().unwrap_err().code, 2);
        let mut cfg = RunConfig::default();
        cfg.time.theta = Some(vec![]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn uniform_time_grid() {
        let mut cfg = RunConfig::default();
        cfg.time.start = 1.0;
        cfg.time.end = 3.0;
        cfg.time.points = 5;
        assert_eq!(cfg.thetas(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
    }
}

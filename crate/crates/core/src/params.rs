//! Dimensionless parameter space and damping-regime classification.
//!
//! Every quantity is measured in units of the trap frequency ω₀ and the
//! ground-state width σ₀: θ = ω₀t, λ = ν/ω₀, R = γ/ω₀, κ = ħω₀/2k_BT and
//! λ_C = Ω/ω₀.

use serde::Serialize;

use crate::error::{Error, Result};

/// Half-width of the band around R = 1 that is classified as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-9;

/// Below this damping ratio the relaxation time is 1/R.
pub const EXTREME_UNDERDAMPED_LIMIT: f64 = 0.5;

/// Above this damping ratio the relaxation time is 2R.
pub const EXTREME_OVERDAMPED_LIMIT: f64 = 2.0;

/// Cutoff used when none is specified.
pub const DEFAULT_CUTOFF: f64 = 1e3;

fn positive_finite(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    if value <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive",
        });
    }
    Ok(value)
}

/// Ohmic bath with sharp cutoff, coupled to the trapped particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BathParameters {
    damping: f64,
    kappa: f64,
    cutoff: f64,
}

impl BathParameters {
    /// `damping` is R = γ/ω₀, `kappa` is ħω₀/2k_BT and `cutoff` is λ_C = Ω/ω₀.
    pub fn new(damping: f64, kappa: f64, cutoff: f64) -> Result<Self> {
        Ok(Self {
            damping: positive_finite("R", damping)?,
            kappa: positive_finite("kappa", kappa)?,
            cutoff: positive_finite("lambda_c", cutoff)?,
        })
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn with_cutoff(self, cutoff: f64) -> Result<Self> {
        Self::new(self.damping, self.kappa, cutoff)
    }

    pub fn with_kappa(self, kappa: f64) -> Result<Self> {
        Self::new(self.damping, kappa, self.cutoff)
    }

    pub fn regime(&self) -> Regime {
        // R was validated on construction.
        classify_damping(self.damping).expect("validated damping")
    }

    /// Asymptotic (λ_C → ∞) formulas need the cutoff to dominate every other
    /// frequency of the problem: 1, R and 1/κ.
    pub fn require_asymptotic_cutoff(&self) -> Result<()> {
        let largest = 1.0f64.max(self.damping).max(1.0 / self.kappa);
        if self.cutoff > largest {
            Ok(())
        } else {
            Err(Error::RegimeGate {
                operation: "asymptotic formula",
                reason: format!(
                    "cutoff {} does not exceed max(1, R, 1/kappa) = {}",
                    self.cutoff, largest
                ),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegimeKind {
    Underdamped,
    Overdamped,
    Critical,
}

/// Damping regime together with the frequency magnitude S.
///
/// Underdamped motion has R² + S² = 1, overdamped motion R² − S² = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub s: f64,
}

impl Regime {
    pub fn is_underdamped(&self) -> bool {
        self.kind == RegimeKind::Underdamped
    }

    pub fn is_overdamped(&self) -> bool {
        self.kind == RegimeKind::Overdamped
    }
}

/// Classifies a damping ratio R and returns the matching S.
pub fn classify_damping(damping: f64) -> Result<Regime> {
    let r = positive_finite("R", damping)?;
    if (r - 1.0).abs() <= CRITICAL_TOLERANCE {
        return Ok(Regime {
            kind: RegimeKind::Critical,
            s: 0.0,
        });
    }
    // (1 - R)(1 + R) keeps full precision close to R = 1.
    let (kind, s2) = if r < 1.0 {
        (RegimeKind::Underdamped, (1.0 - r) * (1.0 + r))
    } else {
        (RegimeKind::Overdamped, (r - 1.0) * (r + 1.0))
    };
    Ok(Regime { kind, s: s2.sqrt() })
}

pub fn classify(params: &BathParameters) -> Regime {
    params.regime()
}

/// Dimensionless relaxation time θ_R: 1/R when extremely underdamped,
/// 2R when extremely overdamped.
pub fn relaxation_time(params: &BathParameters) -> Result<f64> {
    let r = params.damping();
    if r < EXTREME_UNDERDAMPED_LIMIT {
        Ok(1.0 / r)
    } else if r > EXTREME_OVERDAMPED_LIMIT {
        Ok(2.0 * r)
    } else {
        Err(Error::IntermediateDampingUnsupported { damping: r })
    }
}

/// Initial minimum-uncertainty Gaussian: width ζ = σ/σ₀ and momentum p·σ₀/ħ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialState {
    squeezing: f64,
    momentum: f64,
}

impl InitialState {
    pub fn new(squeezing: f64, momentum: f64) -> Result<Self> {
        let squeezing = positive_finite("zeta", squeezing)?;
        if !momentum.is_finite() {
            return Err(Error::InvalidParameter {
                name: "momentum",
                value: momentum,
                reason: "must be finite",
            });
        }
        Ok(Self {
            squeezing,
            momentum,
        })
    }

    /// Unsqueezed packet at rest.
    pub fn coherent() -> Self {
        Self {
            squeezing: 1.0,
            momentum: 0.0,
        }
    }

    pub fn squeezing(&self) -> f64 {
        self.squeezing
    }

    pub fn momentum(&self) -> f64 {
        self.momentum
    }
}

/// Separation r = (x − y)/σ₀ of a matrix element from the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct OffDiagonalDistance(f64);

impl OffDiagonalDistance {
    pub fn new(r: f64) -> Result<Self> {
        if r.is_finite() {
            Ok(Self(r))
        } else {
            Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "must be finite",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_diagonal(self) -> bool {
        self.0 == 0.0
    }
}

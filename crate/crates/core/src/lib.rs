//! Exact reduced-density-matrix evolution of a Gaussian wave packet in a
//! harmonic trap coupled to an ohmic bath, with decoherence diagnostics.
//!
//! All quantities are dimensionless: time θ = ω₀t, frequencies in units of
//! ω₀ and lengths in units of the ground-state width σ₀.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fitting;
pub mod kernels;
pub mod observables;
pub mod params;
pub mod quadrature;
pub mod regimes;
pub mod specfun;
pub mod validation;

pub use error::{Error, Result};
pub use kernels::{coefficients, CoefficientSet, KernelSource};
pub use params::{classify, relaxation_time, BathParameters, InitialState, OffDiagonalDistance, Regime, RegimeKind};
pub use quadrature::{KernelMethod, KernelSample, QuadratureConfig, ThermalWeight};

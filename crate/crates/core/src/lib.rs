//! Steady states, linearized fluctuation spectra and oscillator-mediated
//! relaxation of a qubit coupled to a resonantly driven Duffing oscillator
//! (a Josephson bifurcation amplifier latched to one of its vibration states).
//!
//! Frequencies inside [`attractors`] and [`fluctuations`] are measured in units
//! of the drive detuning `|ω_F − ω₀|`; only [`model`] and the SI entry points of
//! [`rates`] deal with laboratory units.

pub mod attractors;
pub mod error;
pub mod fluctuations;
pub mod model;
pub mod rates;

pub use attractors::{bifurcation_betas, drift_matrix, solve_attractors, Attractor, BifurcationInfo, Branch};
pub use error::{Error, Result};
pub use fluctuations::{
    re_n_minus_plus, re_n_plus_minus, spectrum_matrix, stationary_covariance, two_quantum_g,
    CovarianceMatrix, SpectrumPoint,
};
pub use model::{bath_j, planck, scale_params, BathSpec, PhysicalParams, ScaledParams, Units};
pub use rates::{QubitParams, RateResult, Regime, Transition, ValidityFlag, FlagKind};

//! Kicked Ising fidelity toolkit.
//!
//! A state-vector simulator for the periodically kicked Ising spin-1/2 ring
//! together with the decay laws that connect the stability of its
//! dynamics under a static perturbation (the fidelity, or Loschmidt echo)
//! to the time correlations of the perturbing operator.
//!
//! * [`state`]: state vectors and bitwise gate kernels for one Floquet period.
//! * [`observables`]: Pauli-string observables and trace averaging.
//! * [`dynamics`]: correlation functions, fidelity, time-averaged moments.
//! * [`theory`]: closed-form decay laws, time scales and fits.
//! * [`dense`]: dense-matrix reference implementation for small chains.
//! * [`harness`]: configuration, experiment presets and result files.

pub mod dense;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod observables;
pub mod state;
pub mod theory;

pub use error::{Error, Result};
pub use observables::{Axis, ObservableSpec, TraceAverageSpec, TraceMode};
pub use state::{KickedIsingParams, RngSeed, StateVector};

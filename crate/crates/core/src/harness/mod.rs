//! Configuration, provenance and the command implementations behind the
//! `kifid` binary.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{
    cmd_correlations, cmd_fidelity, cmd_oracle_check, cmd_reproduce, cmd_theory, Figure, OracleReport,
    OracleRequest, Overrides, TheoryReport, TheoryRequest,
};
pub use config::{ExperimentConfig, FidelityMode, Preset};
pub use manifest::RunManifest;

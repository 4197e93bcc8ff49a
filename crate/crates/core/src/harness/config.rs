//! Experiment configuration: a single JSON document.
//!
//! ```json
//! {
//!   "name": "integrable",
//!   "params": { "j_z": 1.0, "h_x": 1.4, "h_z": 0.0 },
//!   "sizes": [12, 14, 16],
//!   "delta_primes": [0.01, 0.04],
//!   "t_max": 300,
//!   "averaging": { "mode": "stochastic", "n_samples": 16, "seed": 1 },
//!   "observable": "M_x",
//!   "fidelity_mode": "plain",
//!   "output_dir": "out"
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{Axis, ObservableKind, TraceAverageSpec, TraceMode, DEFAULT_EXACT_CAP};
use crate::state::{KickedIsingParams, RngSeed};
use crate::theory::unscaled_delta;

/// Sizes above this need `allow_large`.
pub const DEFAULT_MAX_SITES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMode {
    #[default]
    Plain,
    Symmetrized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub params: KickedIsingParams,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    /// Size-scaled perturbation strengths `δ' = δ √(L/L₀)`, `L₀ = 24`.
    #[serde(default = "default_delta_primes")]
    pub delta_primes: Vec<f64>,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default = "default_averaging")]
    pub averaging: TraceAverageSpec,
    #[serde(default = "default_observable")]
    pub observable: ObservableKind,
    #[serde(default)]
    pub fidelity_mode: FidelityMode,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Permit chain lengths above [`DEFAULT_MAX_SITES`].
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_large: bool,
}

fn default_sizes() -> Vec<usize> {
    vec![12, 14, 16]
}

fn default_delta_primes() -> Vec<f64> {
    vec![0.01, 0.02, 0.04]
}

fn default_t_max() -> usize {
    300
}

fn default_averaging() -> TraceAverageSpec {
    TraceAverageSpec { mode: TraceMode::Stochastic, n_samples: 16, seed: RngSeed(1), exact_cap: DEFAULT_EXACT_CAP }
}

fn default_observable() -> ObservableKind {
    ObservableKind::Magnetization(Axis::X)
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Parse and validate; errors carry the 1-based line of the offending
    /// entry.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config {
            line: match e.classify() {
                serde_json::error::Category::Data => line_before_whitespace(text, e.line(), e.column()),
                _ => e.line(),
            },
            message: e.to_string(),
        })?;
        config.validate_with_source(Some(text))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_source(None)
    }

    fn validate_with_source(&self, source: Option<&str>) -> Result<()> {
        let fail = |key: &str, message: String| Error::Config {
            line: source.map_or(0, |s| line_of_key(s, key)),
            message,
        };
        if self.params.validate().is_err() {
            return Err(fail("params", format!("parameters must be finite: {:?}", self.params)));
        }
        if self.sizes.is_empty() {
            return Err(fail("sizes", "at least one chain length is required".into()));
        }
        for &l in &self.sizes {
            if l < 2 {
                return Err(fail("sizes", format!("chain length {l} is below 2")));
            }
            if l > DEFAULT_MAX_SITES && !self.allow_large {
                return Err(fail(
                    "sizes",
                    format!("chain length {l} above {DEFAULT_MAX_SITES} requires \"allow_large\": true"),
                ));
            }
            if l > crate::state::MAX_SITES {
                return Err(fail("sizes", format!("chain length {l} above {}", crate::state::MAX_SITES)));
            }
        }
        if let Some(d) = self.delta_primes.iter().find(|d| !d.is_finite()) {
            return Err(fail("delta_primes", format!("perturbation strength {d} is not finite")));
        }
        if self.t_max == 0 {
            return Err(fail("t_max", "t_max must be at least 1".into()));
        }
        match self.averaging.mode {
            TraceMode::ExactBasisSum => {
                if let Some(l) = self.sizes.iter().find(|&&l| l > self.averaging.exact_cap) {
                    return Err(fail(
                        "averaging",
                        format!("exact trace requested for L = {l}, above the cap {}", self.averaging.exact_cap),
                    ));
                }
            }
            TraceMode::Stochastic if self.averaging.n_samples == 0 => {
                return Err(fail("averaging", "stochastic mode needs n_samples >= 1".into()));
            }
            TraceMode::Stochastic => {}
        }
        for &l in &self.sizes {
            if let Err(e) = self.observable.bind(l) {
                return Err(fail("observable", e.to_string()));
            }
        }
        Ok(())
    }

    /// Unscaled `δ` for chain length `n_sites`.
    pub fn delta_for(&self, delta_prime: f64, n_sites: usize) -> f64 {
        unscaled_delta(delta_prime, n_sites)
    }
}

/// serde_json reports value errors after skipping trailing whitespace, which
/// can land on the next line; step back to the last non-blank character.
fn line_before_whitespace(source: &str, line: usize, column: usize) -> usize {
    let start: usize = source.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    let end = (start + column.saturating_sub(1)).min(source.len());
    let Some(last) = source[..end].rfind(|c: char| !c.is_whitespace()) else {
        return line;
    };
    source[..last].matches('\n').count() + 1
}

/// 1-based line of the first occurrence of `"key"`, or 0 if absent.
fn line_of_key(source: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    source
        .lines()
        .position(|l| l.contains(&needle))
        .map_or(0, |i| i + 1)
}

/// The three parameter points on the line `J = 1, h_x = 1.4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `h_z = 0`, transverse field.
    Integrable,
    /// `h_z = 0.4`, non-integrable and non-ergodic.
    Intermediate,
    /// `h_z = 1.4`, mixing.
    Ergodic,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Integrable, Preset::Intermediate, Preset::Ergodic];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Integrable => "integrable",
            Preset::Intermediate => "intermediate",
            Preset::Ergodic => "ergodic",
        }
    }

    pub fn params(self) -> KickedIsingParams {
        let h_z = match self {
            Preset::Integrable => 0.0,
            Preset::Intermediate => 0.4,
            Preset::Ergodic => 1.4,
        };
        KickedIsingParams { j_z: 1.0, h_x: 1.4, h_z }
    }

    pub fn config(self) -> ExperimentConfig {
        ExperimentConfig {
            name: self.name().to_string(),
            params: self.params(),
            sizes: default_sizes(),
            delta_primes: default_delta_primes(),
            t_max: default_t_max(),
            averaging: default_averaging(),
            observable: default_observable(),
            fidelity_mode: FidelityMode::Plain,
            output_dir: default_output_dir(),
            allow_large: false,
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset `{s}`")))
    }
}

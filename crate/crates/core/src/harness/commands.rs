//! Library side of the `kifid` subcommands. Each command writes its files
//! through a [`RunManifest`] and returns a summary the caller can print.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dense;
use crate::dynamics::{
    correlation_series, estimate_statistics, fidelity_series, Classification, CorrelationStatistics,
};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, FidelityMode, Preset};
use crate::harness::manifest::{RunManifest, RunRecord};
use crate::observables::{Axis, ObservableKind, ObservableSpec, TraceAverageSpec, TraceMode};
use crate::state::{
    floquet_step, perturbed_floquet_step, random_state, KickedIsingParams, RngSeed, StateVector,
};
use crate::theory::{
    d_sigma_x, fit_decay, perturbative_threshold, perturbed_field_map, plateau, saturation, tau_ergodic,
    tau_nonergodic, unscaled_delta, DecayFit, DecayPrediction, DecayRegime,
};

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub mode: Option<TraceMode>,
    pub samples: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) -> Result<()> {
        if let Some(dir) = &self.output_dir {
            config.output_dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            config.averaging.seed = RngSeed(seed);
        }
        if let Some(mode) = self.mode {
            config.averaging.mode = mode;
        }
        if let Some(n) = self.samples {
            config.averaging.n_samples = n;
        }
        config.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub config: String,
    pub n_sites: usize,
    pub observable: String,
    pub csv: PathBuf,
    pub statistics: CorrelationStatistics,
    /// Closed-form per-site plateau for the transverse-field chain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory_d_sigma_x: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CommandOutcome<T> {
    pub summaries: Vec<T>,
    pub manifest: RunManifest,
}

impl CommandOutcome<CorrelationSummary> {
    pub fn any_unresolved(&self) -> bool {
        self.summaries
            .iter()
            .any(|s| s.statistics.classification == Classification::Unresolved)
    }
}

impl CommandOutcome<FidelitySummary> {
    pub fn any_unresolved(&self) -> bool {
        self.summaries
            .iter()
            .any(|s| s.correlation.classification == Classification::Unresolved)
    }
}

fn transverse_plateau(params: &KickedIsingParams, obs: &ObservableKind) -> Option<f64> {
    (params.h_z == 0.0 && *obs == ObservableKind::Magnetization(Axis::X))
        .then(|| d_sigma_x(params.j_z, params.h_x).ok())
        .flatten()
}

fn file_stem(config: &ExperimentConfig) -> String {
    config
        .name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Correlation series `C_A(t)` per chain length, with summary statistics.
pub fn cmd_correlations(config: &ExperimentConfig) -> Result<CommandOutcome<CorrelationSummary>> {
    config.validate()?;
    let mut manifest = RunManifest::new();
    manifest.configs.push(config.clone());
    let stem = file_stem(config);
    let mut summaries = Vec::new();
    for &l in &config.sizes {
        let obs = config.observable.bind(l)?;
        let start = Instant::now();
        let series = correlation_series(&config.params, &obs, config.t_max, &config.averaging)?;
        manifest.runs.push(RunRecord {
            label: format!("{stem}/correlation/L{l}"),
            n_sites: l,
            delta_prime: None,
            delta: None,
            seed: config.averaging.seed.0,
            samples: series.meta.samples,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
        let statistics = estimate_statistics(&series)?;
        let csv = manifest.write_output(&config.output_dir, &format!("{stem}_corr_L{l}.csv"), series.to_csv()?.as_bytes())?;
        let summary = CorrelationSummary {
            config: config.name.clone(),
            n_sites: l,
            observable: obs.name().to_string(),
            csv,
            statistics,
            theory_d_sigma_x: transverse_plateau(&config.params, &config.observable),
        };
        manifest.write_output(
            &config.output_dir,
            &format!("{stem}_corr_L{l}.json"),
            serde_json::to_string_pretty(&summary)?.as_bytes(),
        )?;
        summaries.push(summary);
    }
    Ok(CommandOutcome { summaries, manifest })
}

/// Correlation input to the fidelity predictions, in total (not per-site)
/// units of `A = M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationInput {
    pub s_m: f64,
    pub d_m: f64,
    /// `closed_form` when `D_M = L·D_{σx}` is used, else `measured`.
    pub d_m_source: String,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub tau_fit: f64,
    pub rmse: f64,
    pub window: (usize, usize),
}

/// `{regime, tau, t_star, plateau, fit}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub regime: DecayRegime,
    pub tau: f64,
    pub t_star: f64,
    pub plateau: f64,
    pub fit: Option<FitReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelitySummary {
    pub config: String,
    pub n_sites: usize,
    pub delta_prime: f64,
    pub delta: f64,
    pub symmetrized: bool,
    pub csv: PathBuf,
    pub theory_csv: PathBuf,
    pub correlation: CorrelationInput,
    pub prediction: Option<PredictionReport>,
    pub ergodic: Option<DecayPrediction>,
    pub non_ergodic: Option<DecayPrediction>,
    pub fit: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
}

fn correlation_input(config: &ExperimentConfig, l: usize, manifest: &mut RunManifest) -> Result<CorrelationInput> {
    let m = ObservableSpec::magnetization(l, Axis::X);
    let start = Instant::now();
    let series = correlation_series(&config.params, &m, config.t_max, &config.averaging)?;
    manifest.runs.push(RunRecord {
        label: format!("{}/correlation_for_theory/L{l}", file_stem(config)),
        n_sites: l,
        delta_prime: None,
        delta: None,
        seed: config.averaging.seed.0,
        samples: series.meta.samples,
        wall_seconds: start.elapsed().as_secs_f64(),
    });
    let stats = estimate_statistics(&series)?;
    let scale = series.meta.scale;
    let (d_m, d_m_source) = match transverse_plateau(&config.params, &ObservableKind::Magnetization(Axis::X)) {
        Some(d) => (d * l as f64, "closed_form"),
        None => (stats.d_a * scale, "measured"),
    };
    Ok(CorrelationInput {
        s_m: stats.s_a * scale,
        d_m,
        d_m_source: d_m_source.to_string(),
        classification: stats.classification,
    })
}

/// Fidelity series per `(L, δ')`, with fits and decay-law predictions.
pub fn cmd_fidelity(config: &ExperimentConfig) -> Result<CommandOutcome<FidelitySummary>> {
    config.validate()?;
    let mut manifest = RunManifest::new();
    manifest.configs.push(config.clone());
    let stem = file_stem(config);
    let symmetrized = config.fidelity_mode == FidelityMode::Symmetrized;
    let mut summaries = Vec::new();
    for &l in &config.sizes {
        let correlation = correlation_input(config, l, &mut manifest)?;
        for &dp in &config.delta_primes {
            let delta = unscaled_delta(dp, l);
            let start = Instant::now();
            let series = fidelity_series(&config.params, l, delta, config.t_max, &config.averaging, symmetrized)?;
            manifest.runs.push(RunRecord {
                label: format!("{stem}/fidelity/L{l}/dp{dp}"),
                n_sites: l,
                delta_prime: Some(dp),
                delta: Some(delta),
                seed: config.averaging.seed.0,
                samples: series.meta.samples,
                wall_seconds: start.elapsed().as_secs_f64(),
            });
            let tag = format!("{stem}_fid_L{l}_dp{dp}");
            let csv = manifest.write_output(&config.output_dir, &format!("{tag}.csv"), series.to_csv()?.as_bytes())?;

            let ergodic = tau_ergodic(correlation.s_m, delta)
                .and_then(|tau| DecayPrediction::new(DecayRegime::Ergodic, tau, l))
                .ok();
            let non_ergodic = tau_nonergodic(correlation.d_m, delta)
                .and_then(|tau| DecayPrediction::new(DecayRegime::NonErgodic, tau, l))
                .ok();
            let (fit, fit_error) = match fit_decay(&series, l) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let regime = match correlation.classification {
                Classification::Ergodic => Some(DecayRegime::Ergodic),
                Classification::NonErgodic => Some(DecayRegime::NonErgodic),
                Classification::Unresolved => fit.as_ref().map(|f| f.regime),
            };
            let chosen = match regime {
                Some(DecayRegime::Ergodic) => ergodic,
                Some(DecayRegime::NonErgodic) => non_ergodic,
                None => None,
            };
            let prediction = chosen.map(|p| PredictionReport {
                regime: p.regime,
                tau: p.tau,
                t_star: p.t_star,
                plateau: p.plateau,
                fit: fit.as_ref().map(|f| FitReport {
                    tau_fit: if f.regime == p.regime {
                        f.tau
                    } else if p.regime == DecayRegime::Ergodic {
                        f.tau_exponential
                    } else {
                        f.tau_gaussian
                    },
                    rmse: f.rmse,
                    window: f.window,
                }),
            });
            let theory_csv = manifest.write_output(
                &config.output_dir,
                &format!("{tag}_theory.csv"),
                theory_curves(config.t_max, l, ergodic.as_ref(), non_ergodic.as_ref()).as_bytes(),
            )?;
            let summary = FidelitySummary {
                config: config.name.clone(),
                n_sites: l,
                delta_prime: dp,
                delta,
                symmetrized,
                csv,
                theory_csv,
                correlation: correlation.clone(),
                prediction,
                ergodic,
                non_ergodic,
                fit,
                fit_error,
            };
            manifest.write_output(
                &config.output_dir,
                &format!("{tag}.json"),
                serde_json::to_string_pretty(&summary)?.as_bytes(),
            )?;
            summaries.push(summary);
        }
    }
    Ok(CommandOutcome { summaries, manifest })
}

/// `t,exponential,gaussian,plateau` columns; empty cells where a law is
/// unavailable.
fn theory_curves(
    t_max: usize,
    n_sites: usize,
    ergodic: Option<&DecayPrediction>,
    non_ergodic: Option<&DecayPrediction>,
) -> String {
    let mut out = String::from("t,exponential,gaussian,plateau\n");
    let cell = |p: Option<&DecayPrediction>, t: f64| p.map(|p| format!("{:e}", p.model(t))).unwrap_or_default();
    for t in 0..=t_max {
        let tf = t as f64;
        writeln!(out, "{t},{},{},{:e}", cell(ergodic, tf), cell(non_ergodic, tf), plateau(n_sites))
            .expect("write to string");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryRequest {
    pub params: KickedIsingParams,
    pub n_sites: usize,
    pub delta_prime: f64,
    /// Total integrated correlation `S_A` of `A = M`.
    pub s_a: Option<f64>,
    /// Plateau constant `c_A` in `D_A ≈ c_A/N`.
    pub c_a: Option<f64>,
    /// Measured plateau `D_A`; defaults to `L·D_{σx}` when `h_z = 0`.
    pub d_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub n_sites: usize,
    pub delta_prime: f64,
    pub delta: f64,
    pub d_sigma_x: Option<f64>,
    pub d_m: Option<f64>,
    pub tau_ne: Option<f64>,
    pub t_star_ne: Option<f64>,
    pub tau_e: Option<f64>,
    pub t_star_e: Option<f64>,
    pub plateau: f64,
    pub delta_p: Option<f64>,
    pub perturbed_fields: Option<(f64, f64)>,
    pub notes: Vec<String>,
}

/// Closed-form quantities for one parameter point.
pub fn cmd_theory(req: &TheoryRequest) -> Result<TheoryReport> {
    req.params.validate()?;
    if req.n_sites < 2 {
        return Err(Error::ChainTooShort(req.n_sites));
    }
    let l = req.n_sites;
    let delta = unscaled_delta(req.delta_prime, l);
    let mut notes = Vec::new();
    let d_sigma_x = match d_sigma_x(req.params.j_z, req.params.h_x) {
        Ok(d) => Some(d),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    let d_m = req.d_a.or_else(|| (req.params.h_z == 0.0).then_some(d_sigma_x.map(|d| d * l as f64)).flatten());
    if req.params.h_z != 0.0 && req.d_a.is_none() {
        notes.push("D_M closed form applies only at h_z = 0; pass a measured D_A".into());
    }
    let tau_ne = d_m.and_then(|d| tau_nonergodic(d, delta).ok());
    let tau_e = req.s_a.and_then(|s| tau_ergodic(s, delta).ok());
    let delta_p = match (req.s_a, req.c_a) {
        (Some(s), Some(c)) => Some(perturbative_threshold(s, c, l)?),
        _ => None,
    };
    let perturbed_fields = match perturbed_field_map(req.params.h_x, req.params.h_z, delta) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    Ok(TheoryReport {
        n_sites: l,
        delta_prime: req.delta_prime,
        delta,
        d_sigma_x,
        d_m,
        tau_ne,
        t_star_ne: tau_ne.map(|t| saturation(DecayRegime::NonErgodic, t, l).t_star),
        tau_e,
        t_star_e: tau_e.map(|t| saturation(DecayRegime::Ergodic, t, l).t_star),
        plateau: plateau(l),
        delta_p,
        perturbed_fields,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub n_sites: usize,
    pub params: KickedIsingParams,
    pub delta: f64,
    pub steps: usize,
    pub seed: u64,
    /// Compare against the dense map with its factors in the opposite order.
    pub swap_order: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub request: OracleRequest,
    pub max_state_deviation: f64,
    pub max_perturbed_state_deviation: f64,
    pub max_correlation_deviation: f64,
    pub max_fidelity_deviation: f64,
    pub max_pure_fidelity_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleReport {
    pub fn max_deviation(&self) -> f64 {
        [
            self.max_state_deviation,
            self.max_perturbed_state_deviation,
            self.max_correlation_deviation,
            self.max_fidelity_deviation,
            self.max_pure_fidelity_deviation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// Compare gate evolution, `C_M(t)` and `F(t)` with dense matrices.
pub fn cmd_oracle_check(req: &OracleRequest) -> Result<OracleReport> {
    let l = req.n_sites;
    if l > dense::MAX_DENSE_SITES {
        return Err(Error::InvalidArgument(format!(
            "oracle check supports L <= {}, got {l}",
            dense::MAX_DENSE_SITES
        )));
    }
    req.params.validate()?;
    let u = if req.swap_order {
        dense::floquet_matrix_swapped(l, &req.params)?
    } else {
        dense::floquet_matrix(l, &req.params)?
    };
    let m_dense = dense::magnetization(l, Axis::X);
    let u_delta = &u * dense::unitary_from_generator(&m_dense, req.delta);

    let psi0 = random_state(l, RngSeed(req.seed))?;
    let mut gate: StateVector = psi0.clone();
    let mut gate_pert = psi0.clone();
    let mut dense_state = psi0.clone();
    let mut dense_pert = psi0.clone();
    let mut max_state: f64 = 0.0;
    let mut max_pert: f64 = 0.0;
    for _ in 0..req.steps {
        floquet_step(&mut gate, &req.params);
        perturbed_floquet_step(&mut gate_pert, &req.params, req.delta);
        dense_state = dense::apply(&u, &dense_state)?;
        dense_pert = dense::apply(&u_delta, &dense_pert)?;
        max_state = max_state.max(gate.max_abs_diff(&dense_state)?);
        max_pert = max_pert.max(gate_pert.max_abs_diff(&dense_pert)?);
    }

    let exact = TraceAverageSpec::exact().with_cap(dense::MAX_DENSE_SITES);
    let m = ObservableSpec::magnetization(l, Axis::X);
    let corr = correlation_series(&req.params, &m, req.steps.max(1), &exact)?;
    let corr_dense = dense::correlation_series(&u, &m_dense, req.steps.max(1));
    let max_corr = (0..corr.len())
        .map(|t| (corr.raw(t) - corr_dense[t]).norm())
        .fold(0.0, f64::max);

    let fid = fidelity_series(&req.params, l, req.delta, req.steps.max(1), &exact, false)?;
    let fid_dense = dense::fidelity_series(&u, &u_delta, req.steps.max(1));
    let max_fid = fid
        .values
        .iter()
        .zip(&fid_dense)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let pure = fidelity_series(
        &req.params,
        l,
        req.delta,
        req.steps.max(1),
        &TraceAverageSpec::stochastic(1, req.seed),
        false,
    )?;
    let psi_pure = TraceAverageSpec::stochastic(1, req.seed).sample_state(l, 0)?;
    let pure_dense = dense::pure_state_fidelity(&u, &u_delta, &psi_pure, req.steps.max(1));
    let max_pure = pure
        .values
        .iter()
        .zip(&pure_dense)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let mut report = OracleReport {
        request: *req,
        max_state_deviation: max_state,
        max_perturbed_state_deviation: max_pert,
        max_correlation_deviation: max_corr,
        max_fidelity_deviation: max_fid,
        max_pure_fidelity_deviation: max_pure,
        tolerance: ORACLE_TOLERANCE,
        passed: false,
    };
    report.passed = report.max_deviation() <= ORACLE_TOLERANCE;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            _ => Err(Error::InvalidArgument(format!("unknown figure `{s}` (expected fig1 or fig2)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceOutcome {
    pub correlations: Vec<CorrelationSummary>,
    pub fidelities: Vec<FidelitySummary>,
    pub manifest: RunManifest,
    pub unresolved: bool,
    pub manifest_path: PathBuf,
}

/// Run the three presets for one figure, write a gnuplot script and the
/// manifest into `overrides.output_dir` (default `out/<fig>`).
pub fn cmd_reproduce(figure: Figure, overrides: &Overrides, allow_large: bool, sizes: Option<Vec<usize>>) -> Result<ReproduceOutcome> {
    let fig_name = match figure {
        Figure::Fig1 => "fig1",
        Figure::Fig2 => "fig2",
    };
    let out_dir = overrides.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(fig_name));
    let mut manifest = RunManifest::new();
    let mut correlations = Vec::new();
    let mut fidelities = Vec::new();
    let mut unresolved = false;
    let mut files: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    for preset in Preset::ALL {
        let mut config = preset.config();
        config.allow_large = allow_large;
        if let Some(s) = &sizes {
            config.sizes = s.clone();
        }
        let o = Overrides { output_dir: Some(out_dir.clone()), ..overrides.clone() };
        o.apply(&mut config)?;
        match figure {
            Figure::Fig1 => {
                let r = cmd_correlations(&config)?;
                unresolved |= r.any_unresolved();
                files.entry(preset.name().into()).or_default().extend(r.summaries.iter().map(|s| s.csv.clone()));
                correlations.extend(r.summaries);
                manifest.merge(r.manifest);
            }
            Figure::Fig2 => {
                let r = cmd_fidelity(&config)?;
                unresolved |= r.any_unresolved();
                files.entry(preset.name().into()).or_default().extend(r.summaries.iter().map(|s| s.csv.clone()));
                fidelities.extend(r.summaries);
                manifest.merge(r.manifest);
            }
        }
    }
    let script = gnuplot_script(figure, &files);
    manifest.write_output(&out_dir, &format!("{fig_name}.gp"), script.as_bytes())?;
    let manifest_path = manifest.save(&out_dir)?;
    Ok(ReproduceOutcome { correlations, fidelities, manifest, unresolved, manifest_path })
}

fn gnuplot_script(figure: Figure, files: &BTreeMap<String, Vec<PathBuf>>) -> String {
    let mut s = String::new();
    let (column, ylabel, logscale) = match figure {
        Figure::Fig1 => ("2", "C_M(t)/L", ""),
        Figure::Fig2 => ("4", "|F(t)|", "set logscale y\n"),
    };
    writeln!(s, "# gnuplot script; run from the output directory with `gnuplot -p <this file>`").unwrap();
    s.push_str("set datafile separator comma\nset key autotitle columnhead\nset xlabel 't'\n");
    writeln!(s, "set ylabel '{ylabel}'\n{logscale}set multiplot layout 3,1").unwrap();
    for (preset, paths) in files {
        writeln!(s, "set title '{preset}'").unwrap();
        let plots: Vec<String> = paths
            .iter()
            .map(|p| {
                let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                format!("'{name}' using 1:{column} with linespoints title '{name}'")
            })
            .collect();
        writeln!(s, "plot {}", plots.join(", \\\n     ")).unwrap();
    }
    s.push_str("unset multiplot\n");
    s
}

/// Write a single summary as pretty JSON to stdout-ready text.
pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Default oracle request: L = 6, 50 steps, the ergodic preset.
pub fn default_oracle_request() -> OracleRequest {
    OracleRequest {
        n_sites: 6,
        params: Preset::Ergodic.params(),
        delta: 0.05,
        steps: 50,
        seed: 7,
        swap_order: false,
    }
}

pub fn output_dir_or_default(dir: Option<&Path>) -> PathBuf {
    dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("out"))
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kifid::harness::commands::{self, default_oracle_request};
use kifid::harness::{ExperimentConfig, Figure, OracleRequest, Overrides, Preset, TheoryRequest};
use kifid::state::init_thread_pool;
use kifid::{Error, KickedIsingParams, TraceMode};

const EXIT_CONFIG: u8 = 2;
const EXIT_UNRESOLVED: u8 = 3;
const EXIT_ORACLE: u8 = 4;

#[derive(Parser)]
#[command(name = "kifid", version, about = "Kicked Ising correlation and fidelity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in parameter point used when no config is given.
    #[arg(long, default_value = "integrable")]
    preset: String,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 or unset: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Base seed for random states.
    #[arg(long)]
    seed: Option<u64>,
    /// Sum over the full product basis (L <= 12).
    #[arg(long, conflicts_with = "stochastic")]
    exact: bool,
    /// Average over random gaussian states.
    #[arg(long)]
    stochastic: bool,
    /// Number of random states.
    #[arg(long)]
    samples: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            output_dir: self.out.clone(),
            seed: self.seed,
            mode: if self.exact {
                Some(TraceMode::ExactBasisSum)
            } else if self.stochastic {
                Some(TraceMode::Stochastic)
            } else {
                None
            },
            samples: self.samples,
        }
    }

    fn load(&self) -> kifid::Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => self.preset.parse::<Preset>()?.config(),
        };
        self.overrides().apply(&mut config)?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Correlation functions C_A(t) with plateau and integrated-correlation estimates.
    Correlations(Common),
    /// Fidelity F(t) with decay fits and predictions.
    Fidelity(Common),
    /// Closed-form time scales for one parameter point.
    Theory {
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        #[arg(long, default_value_t = 1.4)]
        hx: f64,
        #[arg(long, default_value_t = 0.0)]
        hz: f64,
        #[arg(long, default_value_t = 24)]
        sites: usize,
        /// Size-scaled perturbation strength.
        #[arg(long, default_value_t = 0.02)]
        delta_prime: f64,
        /// Integrated correlation S_A of the perturbing operator.
        #[arg(long)]
        s_a: Option<f64>,
        /// Measured plateau D_A of the perturbing operator.
        #[arg(long)]
        d_a: Option<f64>,
        /// Plateau constant c_A in D_A = c_A / 2^L.
        #[arg(long)]
        c_a: Option<f64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check the gate kernels against dense matrices on a small chain.
    OracleCheck {
        /// Chain length, at most 8 [default: 6].
        #[arg(long)]
        sites: Option<usize>,
        /// Floquet periods [default: 50].
        #[arg(long)]
        steps: Option<usize>,
        /// Perturbation strength [default: 0.05].
        #[arg(long)]
        delta: Option<f64>,
        /// integrable, intermediate or ergodic [default: ergodic].
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Compare against the reversed factor order (expected to fail).
        #[arg(long)]
        swap_order: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Regenerate the data behind one figure.
    Reproduce {
        /// fig1 (correlations) or fig2 (fidelity).
        figure: String,
        #[command(flatten)]
        common: Common,
        /// Override the chain lengths, e.g. `--sizes 10,12`.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Permit chain lengths above 16.
        #[arg(long)]
        allow_large: bool,
    },
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::Io(_) => ExitCode::FAILURE,
        _ => ExitCode::from(EXIT_CONFIG),
    }
}

fn run(cli: Cli) -> kifid::Result<ExitCode> {
    match cli.command {
        Command::Correlations(common) => {
            init_thread_pool(common.threads);
            let config = common.load()?;
            let outcome = commands::cmd_correlations(&config)?;
            println!("{}", commands::to_pretty_json(&outcome.summaries)?);
            outcome.manifest.save(&config.output_dir)?;
            Ok(if outcome.any_unresolved() { ExitCode::from(EXIT_UNRESOLVED) } else { ExitCode::SUCCESS })
        }
        Command::Fidelity(common) => {
            init_thread_pool(common.threads);
            let config = common.load()?;
            let outcome = commands::cmd_fidelity(&config)?;
            println!("{}", commands::to_pretty_json(&outcome.summaries)?);
            outcome.manifest.save(&config.output_dir)?;
            Ok(if outcome.any_unresolved() { ExitCode::from(EXIT_UNRESOLVED) } else { ExitCode::SUCCESS })
        }
        Command::Theory { j, hx, hz, sites, delta_prime, s_a, d_a, c_a, threads } => {
            init_thread_pool(threads);
            let params = KickedIsingParams::new(j, hx, hz)?;
            let report = commands::cmd_theory(&TheoryRequest { params, n_sites: sites, delta_prime, s_a, c_a, d_a })?;
            println!("{}", commands::to_pretty_json(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleCheck { sites, steps, delta, preset, seed, swap_order, threads } => {
            init_thread_pool(threads);
            let base = default_oracle_request();
            let req = OracleRequest {
                n_sites: sites.unwrap_or(base.n_sites),
                params: match preset {
                    Some(p) => p.parse::<Preset>()?.params(),
                    None => base.params,
                },
                delta: delta.unwrap_or(base.delta),
                steps: steps.unwrap_or(base.steps),
                seed: seed.unwrap_or(base.seed),
                swap_order,
            };
            let report = commands::cmd_oracle_check(&req)?;
            println!("{}", commands::to_pretty_json(&report)?);
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(EXIT_ORACLE) })
        }
        Command::Reproduce { figure, common, sizes, allow_large } => {
            init_thread_pool(common.threads);
            let figure: Figure = figure.parse()?;
            if common.config.is_some() {
                return Err(Error::InvalidArgument("reproduce runs the built-in presets; --config is not used".into()));
            }
            let outcome = commands::cmd_reproduce(figure, &common.overrides(), allow_large, sizes)?;
            eprintln!("wrote {}", outcome.manifest_path.display());
            Ok(if outcome.unresolved { ExitCode::from(EXIT_UNRESOLVED) } else { ExitCode::SUCCESS })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    run(cli).unwrap_or_else(|e| exit_for(&e))
}

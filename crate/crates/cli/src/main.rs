mod report;
mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gqms::fuzz::{self, FuzzConfig};
use gqms::generator::{self, GaussianStateParams};
use gqms::io::{params_from_json, real_rows, vector_to_entries, StateFile};
use gqms::models::{self, BosonChainSpec};
use gqms::pipeline::{analyze, AnalysisOptions};
use gqms::{Error, ErrorKind};

use report::{
    AnalysisReport, BosonChainReport, ClosedFormSection, DecayFit, EvolutionReport, EvolutionRow, FuzzReport,
    ToolInfo,
};

const DEFAULT_SEED: u64 = 20240501;

#[derive(Debug, Parser)]
#[command(name = "gqms", version, about = "Spectral-gap analysis of Gaussian quantum Markov semigroups")]
struct Cli {
    #[command(flatten)]
    flags: GlobalFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalFlags {
    /// Required distance of the drift spectrum from the imaginary axis.
    #[arg(long, global = true, default_value_t = 1e-3)]
    tol_stability: f64,
    /// Inverse temperatures closer than this (relative) share a class.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_temperature: f64,
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_rank: f64,
    /// Digits in human-readable output.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,
    /// Emit the machine-readable report instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a generator file.
    Analyze { input: PathBuf },
    /// Analyze the three-mode boson chain and compare with its closed form.
    BosonChain {
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = std::f64::consts::LN_2)]
        beta1: f64,
        #[arg(long, default_value_t = 3.0_f64.ln())]
        beta3: f64,
    },
    /// Check the library invariants on random instances.
    Fuzz {
        #[arg(long, default_value_t = 500)]
        count: usize,
    },
    /// Evolve a Gaussian state under the semigroup.
    Evolve {
        input: PathBuf,
        /// Comma-separated evaluation times.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        times: Vec<f64>,
        /// Initial state file; defaults to the vacuum.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Fit the decay rate of the distance to the invariant state.
        #[arg(long)]
        fit: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Violations(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Core(e) => match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::ModelAssumption => 2,
                ErrorKind::Numerical => 3,
            },
            Failure::Violations(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Violations(n) => write!(f, "{n} invariant violations"),
        }
    }
}

impl GlobalFlags {
    fn options(&self) -> Result<AnalysisOptions, Failure> {
        for (name, v) in [
            ("--tol-stability", self.tol_stability),
            ("--tol-temperature", self.tol_temperature),
            ("--tol-rank", self.tol_rank),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Failure::Usage(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        Ok(AnalysisOptions {
            stability_margin: self.tol_stability,
            temperature_tol: self.tol_temperature,
            rank_tol: self.tol_rank,
            ..AnalysisOptions::default()
        })
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn emit<T: serde::Serialize>(flags: &GlobalFlags, value: &T, human: impl FnOnce(&T, usize) -> String) {
    if flags.json {
        println!("{}", render::to_json(value));
    } else {
        print!("{}", human(value, flags.precision));
    }
}

fn cmd_analyze(flags: &GlobalFlags, input: &Path) -> Result<(), Failure> {
    let options = flags.options()?;
    let params = params_from_json(&read(input)?)?;
    let a = analyze(&params, &options)?;
    emit(flags, &AnalysisReport::new(&a, &options, flags.seed), render::analysis);
    Ok(())
}

fn cmd_boson_chain(flags: &GlobalFlags, omega: f64, beta1: f64, beta3: f64) -> Result<(), Failure> {
    let options = flags.options()?;
    let spec = BosonChainSpec::new(omega, beta1, beta3)?;
    let a = analyze(&models::boson_chain_params(&spec)?, &options)?;
    let cf = models::boson_chain_closed_form(&spec)?;
    let report = BosonChainReport {
        analysis: AnalysisReport::new(&a, &options, flags.seed),
        closed_form: ClosedFormSection::new(spec, &cf, &a),
    };
    emit(flags, &report, render::boson_chain);
    Ok(())
}

fn cmd_fuzz(flags: &GlobalFlags, count: usize) -> Result<(), Failure> {
    let options = flags.options()?;
    let mut config = FuzzConfig {
        options,
        ..FuzzConfig::default()
    };
    config.sampler.stability_margin = options.stability_margin;
    let seed = flags.seed.unwrap_or(DEFAULT_SEED);
    let summary = fuzz::run(count, seed, &config);
    let violations = summary.violations.len();
    let report = FuzzReport {
        tool: ToolInfo::current(),
        tolerances: options,
        summary,
    };
    emit(flags, &report, render::fuzz);
    if violations > 0 {
        return Err(Failure::Violations(violations));
    }
    Ok(())
}

fn cmd_evolve(flags: &GlobalFlags, input: &Path, times: &[f64], state: Option<&Path>, fit: bool) -> Result<(), Failure> {
    let options = flags.options()?;
    let params = params_from_json(&read(input)?)?;
    let state0 = match state {
        Some(p) => StateFile::from_json(&read(p)?)?.to_state()?,
        None => GaussianStateParams::vacuum(params.d()),
    };
    if state0.dim() != params.d() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} modes, generator has {}",
            state0.dim(),
            params.d()
        ))
        .into());
    }
    let stability = generator::is_stable(&generator::drift(&params), options.stability_margin)?;
    let s_inf = if stability.stable {
        Some(generator::invariant_state(&params)?.covariance_matrix())
    } else {
        None
    };
    let samples = generator::trajectory(&params, &state0, times)?;
    let rows: Vec<EvolutionRow> = samples
        .iter()
        .map(|s| {
            let cov = s.state.covariance_matrix();
            EvolutionRow {
                t: s.t,
                mean: vector_to_entries(&s.state.mean),
                covariance: real_rows(&cov),
                distance_to_invariant: s_inf.as_ref().map(|si| (&cov - si).norm()),
            }
        })
        .collect();
    let fit = if fit {
        let Some(_) = s_inf else {
            return Err(Error::Unstable {
                abscissa: stability.spectral_abscissa,
                bound: -options.stability_margin,
            }
            .into());
        };
        let distances: Vec<f64> = rows.iter().map(|r| r.distance_to_invariant.unwrap_or(0.0)).collect();
        let rate = generator::fit_log_slope(times, &distances)?;
        let expected = 2.0 * stability.spectral_abscissa;
        Some(DecayFit {
            rate,
            expected,
            relative_error: (rate - expected).abs() / expected.abs(),
        })
    } else {
        None
    };
    let report = EvolutionReport {
        tool: ToolInfo::current(),
        spectral_abscissa: stability.spectral_abscissa,
        rows,
        fit,
    };
    emit(flags, &report, render::evolution);
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let flags = &cli.flags;
    match &cli.command {
        Command::Analyze { input } => cmd_analyze(flags, input),
        Command::BosonChain { omega, beta1, beta3 } => cmd_boson_chain(flags, *omega, *beta1, *beta3),
        Command::Fuzz { count } => cmd_fuzz(flags, *count),
        Command::Evolve {
            input,
            times,
            state,
            fit,
        } => cmd_evolve(flags, input, times, state.as_deref(), *fit),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

//! `srivc` command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration or usage error,
//! 3 singular normal matrix, 4 I/O failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ctlti::{CtTransferFunction, ParameterVector};
use crate::error::{Error, Result};
use crate::estimator::{srivc_estimate, HoldPolicy, Init, SrivcConfig};
use crate::holdsim::{Hold, SampledSignal};
use crate::mcharness::{emit_plot_data, run_mc_sweep, summarize, RawResults, SweepConfig};
use crate::signals::{
    gen_prbs, gen_random_binary, synthesize_multisine_record, synthesize_record, NoiseSpec,
    SampledRecord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SRIVC_OUT_DIR";

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularNormalMatrix { .. } => EXIT_SINGULAR,
            Error::Io(_) => EXIT_IO,
            Error::Csv(e) if e.is_io_error() => EXIT_IO,
            Error::Config(_)
            | Error::Parse(_)
            | Error::Improper { .. }
            | Error::LengthMismatch { .. }
            | Error::UnstableModel
            | Error::DegenerateModel(_)
            | Error::ZeroLeadingCoefficient => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "srivc",
    version,
    about = "Continuous-time transfer function estimation with explicit hold assumptions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a sampled input/output record from a known system.
    Simulate(SimulateArgs),
    /// Estimate a transfer function from a record with SRIVC.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo sweep described by a config file.
    McSweep(SweepArgs),
    /// Turn a raw results table into mean/variance plot data and figures.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputArg {
    /// i.i.d. equiprobable +-amplitude
    Binary,
    /// 15-bit maximum-length sequence
    Prbs,
    /// sin(0.5t)+sin(2t)+sin(5t)+sin(7t) with analytic stationary output
    Multisine,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// System as "num: b0,..,bm ; den: a1,..,an,1".
    #[arg(long)]
    pub system: String,
    /// Sampling period in seconds (ignored with --input-file).
    #[arg(long = "T", default_value_t = 0.1)]
    pub period: f64,
    /// Number of samples (ignored with --input-file).
    #[arg(long = "N", default_value_t = 1000)]
    pub len: usize,
    /// Input samples as a "t,value" CSV instead of a generated signal.
    #[arg(long)]
    pub input_file: Option<PathBuf>,
    /// Generated input type.
    #[arg(long, value_enum, default_value_t = InputArg::Binary)]
    pub input: InputArg,
    /// Amplitude of binary inputs.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Intersample behaviour of the true input: zoh or foh.
    #[arg(long, default_value = "zoh")]
    pub hold: Hold,
    /// Variance of the additive white Gaussian output noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise_var: f64,
    /// Seed for the input and the noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output "t,u,y" CSV; a ".meta" sidecar is written next to it.
    /// Defaults to $SRIVC_OUT_DIR/record.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Record CSV ("t,u,y"), optionally with a ".meta" sidecar.
    #[arg(long)]
    pub data: PathBuf,
    /// Denominator order.
    #[arg(long)]
    pub n: usize,
    /// Numerator order (must not exceed n).
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value = "zoh")]
    pub hold_regressor_input: Hold,
    #[arg(long, default_value = "zoh")]
    pub hold_instrument_input: Hold,
    #[arg(long, default_value = "zoh")]
    pub hold_output: Hold,
    /// Maximum number of SRIVC iterations.
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Relative-step stopping tolerance.
    #[arg(long, default_value_t = 1e-7)]
    pub eps: f64,
    /// Cutoff (rad/s) of the state-variable filter used for the initial
    /// estimate; defaults to 1/T.
    #[arg(long)]
    pub init_lambda: Option<f64>,
    /// Explicit initial parameters "a1,..,an,b0,..,bm" (overrides --init-lambda).
    #[arg(long)]
    pub init_theta: Option<String>,
    /// Largest accepted condition estimate of the normal matrix.
    #[arg(long, default_value_t = 1e12)]
    pub condition_limit: f64,
    /// Iteration-history CSV. Defaults to $SRIVC_OUT_DIR/estimate.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep config (key = value lines), e.g. presets/desk.cfg.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for raw.csv and summary.csv. Defaults to
    /// $SRIVC_OUT_DIR or the current directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Raw results CSV written by mc-sweep.
    #[arg(long)]
    pub results: PathBuf,
    /// Output directory for plot data and SVG figures. Defaults to
    /// $SRIVC_OUT_DIR or the current directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// True system, drawn as the dotted reference in the mean figure.
    #[arg(long, default_value = "num: 1 ; den: 0.04,0.2,1")]
    pub system: String,
}

fn default_out(arg: Option<PathBuf>, file: Option<&str>) -> PathBuf {
    arg.unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
        match file {
            Some(f) => dir.join(f),
            None => dir,
        }
    })
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("--{name} must be finite, got {v}")))
    }
}

pub fn cmd_simulate(args: SimulateArgs) -> Result<String> {
    let system: CtTransferFunction = args.system.parse()?;
    finite("T", args.period)?;
    finite("noise-var", args.noise_var)?;
    finite("amplitude", args.amplitude)?;
    let noise = NoiseSpec::white(args.noise_var);
    let record = match (&args.input_file, args.input) {
        (Some(path), _) => {
            let u = SampledSignal::read_csv(std::fs::File::open(path)?)?;
            synthesize_record(&system, &u, args.hold, &noise, args.seed)?
        }
        (None, InputArg::Multisine) => {
            synthesize_multisine_record(&system, args.len, args.period, &noise, args.seed)?
        }
        (None, kind) => {
            if args.len == 0 {
                return Err(Error::Config("--N must be at least 1".into()));
            }
            let u = if kind == InputArg::Prbs {
                gen_prbs(args.len, args.amplitude, args.period, args.seed)?
            } else {
                gen_random_binary(args.len, args.amplitude, args.period, args.seed)?
            };
            synthesize_record(&system, &u, args.hold, &noise, args.seed)?
        }
    };
    let out = default_out(args.out, Some("record.csv"));
    record.save(&out)?;
    Ok(format!(
        "wrote {} samples (T = {}) to {}",
        record.len(),
        record.period(),
        out.display()
    ))
}

pub fn cmd_estimate(args: EstimateArgs) -> Result<String> {
    let record = SampledRecord::load(&args.data)?;
    let init = match (&args.init_theta, args.init_lambda) {
        (Some(theta), _) => {
            let values = theta
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("--init-theta {v:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Init::Explicit(ParameterVector::new(values, args.n, args.m)?)
        }
        (None, lambda) => Init::Lssvf { lambda },
    };
    let config = SrivcConfig {
        n: args.n,
        m: args.m,
        max_iterations: args.max_iter,
        epsilon: finite("eps", args.eps)?,
        holds: HoldPolicy {
            regressor_input: args.hold_regressor_input,
            instrument_input: args.hold_instrument_input,
            output: args.hold_output,
        },
        init,
        condition_limit: args.condition_limit,
    };
    config.validate()?;
    let result = srivc_estimate(&record, &config)?;
    let out = default_out(args.out, Some("estimate.csv"));
    result.write_csv(std::fs::File::create(&out)?)?;

    let names = crate::estimator::param_names(args.n, args.m);
    let theta = result
        .theta()
        .values()
        .iter()
        .zip(&names)
        .map(|(v, n)| format!("{n} = {v:.8}"))
        .collect::<Vec<_>>()
        .join(", ");
    let mut msg = format!(
        "theta: {theta}\niterations: {}\nconverged: {}\nfinal relative step: {:e}\nhistory: {}",
        result.iterations,
        result.converged,
        result.final_relative_step,
        out.display()
    );
    if !result.converged {
        msg.push_str("\nwarning: stopping rule not met within --max-iter iterations");
    }
    Ok(msg)
}

pub fn cmd_mc_sweep(args: SweepArgs) -> Result<String> {
    let config = SweepConfig::load(&args.config)?;
    let (summary, raw) = run_mc_sweep(&config, args.jobs)?;
    let dir = default_out(args.out, None);
    std::fs::create_dir_all(&dir)?;
    raw.write_csv(std::fs::File::create(dir.join("raw.csv"))?)?;
    summary.write_csv(std::fs::File::create(dir.join("summary.csv"))?)?;
    let failures: usize = raw.rows.iter().filter(|r| !r.succeeded()).count();
    Ok(format!(
        "{} runs ({} failed); wrote {} and {}",
        raw.rows.len(),
        failures,
        dir.join("raw.csv").display(),
        dir.join("summary.csv").display()
    ))
}

pub fn cmd_analyze(args: AnalyzeArgs) -> Result<String> {
    let system: CtTransferFunction = args.system.parse()?;
    let raw = RawResults::read_csv(std::fs::File::open(&args.results)?)?;
    let summary = summarize(&raw)?;
    let truth = crate::ctlti::theta_from_tf(&system);
    if truth.n() != raw.n || truth.m() > raw.m {
        return Err(Error::Config(format!(
            "--system orders ({}, {}) do not match results ({}, {})",
            truth.n(),
            truth.m(),
            raw.n,
            raw.m
        )));
    }
    let truth = pad_truth(&truth, raw.m);
    let dir = default_out(args.out, None);
    let files = emit_plot_data(&summary, &truth, &dir)?;
    Ok(format!("wrote {} files to {}", files.len(), dir.display()))
}

/// Truth vector with leading zero numerator coefficients up to order `m`.
fn pad_truth(truth: &ParameterVector, m: usize) -> Vec<f64> {
    let mut v = truth.den_params().to_vec();
    v.extend(std::iter::repeat_n(0.0, m - truth.m()));
    v.extend_from_slice(truth.num_params());
    v
}

/// Dispatches a parsed command; returns the console message.
pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::McSweep(a) => cmd_mc_sweep(a),
        Command::Analyze(a) => cmd_analyze(a),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(msg) => {
            println!("{msg}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Path helper used by tests and examples.
pub fn preset_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("presets")
        .join(name)
}

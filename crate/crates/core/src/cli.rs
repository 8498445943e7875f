//! The `cocktail` command line.
//!
//! Exit codes: 0 on success, 1 when a computation or output fails, 2 on a
//! usage error. Flags override values from a `--config` file.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_points, ConfigFile};
use crate::error::Error;
use crate::mi::{mi_discrete_awgn, Constellation, NoiseSpec, QuadratureConfig};
use crate::scheme::CocktailParams;
use crate::sim::{
    ber_analytic_layer1, ber_analytic_layer2_genie, simulate, CancellationMode, SimConfig,
};
use crate::sweep::{find_crossover, format_sig9, sweep, write_csv, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_RATIO: f64 = 0.7;

#[derive(Debug, Parser)]
#[command(
    name = "cocktail",
    version,
    about = "Rates, mutual information and link simulation for two-layer superposed BPSK"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Tabulate layered rate, capacity and exact mutual information over an SNR grid (CSV).
    Sweep(SweepArgs),
    /// Bisect the SNR where the layered rate falls below capacity.
    Crossover(CrossoverArgs),
    /// Monte Carlo two-step detection.
    Simulate(SimulateArgs),
    /// Mutual information of an equiprobable real constellation in Gaussian noise.
    Mi(MiArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    /// Amplitude ratio beta/alpha in (0, 1) [default: 0.7]
    #[arg(long)]
    ratio: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    snr_min: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    snr_max: Option<f64>,
    /// [default: 0.01]
    #[arg(long)]
    step: Option<f64>,
    /// Quadrature tolerance in bits [default: 1e-9]
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; output bytes do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct CrossoverArgs {
    /// [default: 0.7]
    #[arg(long)]
    ratio: Option<f64>,
    /// Upper end of the search; the gap must be negative here [default: 1]
    #[arg(long)]
    snr_hi: Option<f64>,
    /// Final bracket width [default: 1e-4]
    #[arg(long)]
    tol: Option<f64>,
    /// [default: 1e-9]
    #[arg(long)]
    abs_tol: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    /// [default: 0.7]
    #[arg(long)]
    ratio: Option<f64>,
    /// Input energy over complex-baseband noise power (> 0).
    #[arg(long)]
    snr: Option<f64>,
    /// [default: 1000000]
    #[arg(long)]
    symbols: Option<u64>,
    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// genie | dd [default: genie]
    #[arg(long)]
    mode: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct MiArgs {
    /// Comma-separated real points, e.g. 1.7,-1.7,0.3,-0.3
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    /// Noise variance of the real channel [default: 1]
    #[arg(long)]
    sigma2: Option<f64>,
    /// [default: 1e-9]
    #[arg(long)]
    abs_tol: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

/// A fully resolved and validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Sweep {
        spec: SweepSpec,
        workers: Option<usize>,
    },
    Crossover {
        ratio: f64,
        snr_hi: f64,
        tol: f64,
        quadrature: QuadratureConfig,
    },
    Simulate {
        ratio: f64,
        snr: f64,
        config: SimConfig,
    },
    Mi {
        points: Vec<f64>,
        sigma2: f64,
        quadrature: QuadratureConfig,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Help or version output requested; not a failure.
    Info(String),
    Usage(String),
    Compute(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Info(_) => EXIT_OK,
            Self::Usage(_) => EXIT_USAGE,
            Self::Compute(_) => EXIT_COMPUTE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Info(s) => f.write_str(s),
            Self::Usage(s) => write!(f, "usage error: {s}"),
            Self::Compute(e) => write!(f, "error: {e}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Flag value, else config value, else nothing.
struct Resolver {
    file: ConfigFile,
}

impl Resolver {
    fn load(common: &CommonArgs) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path).map_err(|e| match e {
                Error::Config { .. } => usage(format!("--config {}: {e}", path.display())),
                other => usage(format!("--config: {other}")),
            })?,
            None => ConfigFile::default(),
        };
        Ok(Self { file })
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("config key {key}: cannot parse {raw:?}"))),
        }
    }

    fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }
}

fn check(ok: bool, flag: &str, msg: impl std::fmt::Display) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(usage(format!("--{flag}: {msg}")))
    }
}

fn check_ratio(ratio: f64) -> Result<(), CliError> {
    check(ratio > 0.0 && ratio < 1.0, "ratio", format!("must lie in (0, 1), got {ratio}"))
}

fn quadrature(abs_tol: f64) -> Result<QuadratureConfig, CliError> {
    check(
        abs_tol.is_finite() && abs_tol > 0.0,
        "abs-tol",
        format!("must be > 0, got {abs_tol}"),
    )?;
    Ok(QuadratureConfig::with_abs_tol(abs_tol))
}

fn default_abs_tol() -> f64 {
    QuadratureConfig::default().abs_tol
}

/// Parses `argv` (including the program name) and resolves the config file.
pub fn parse_invocation<I, S>(argv: I) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;

    match cli.command {
        CommandArgs::Sweep(a) => {
            let r = Resolver::load(&a.common)?;
            let ratio = r.or(a.ratio, "ratio", DEFAULT_RATIO)?;
            check_ratio(ratio)?;
            let snr_min = r.or(a.snr_min, "snr-min", 0.0)?;
            check(
                snr_min.is_finite() && snr_min >= 0.0,
                "snr-min",
                format!("must be >= 0, got {snr_min}"),
            )?;
            let snr_max = r.or(a.snr_max, "snr-max", 1.0)?;
            check(
                snr_max.is_finite() && snr_max > snr_min,
                "snr-max",
                format!("must exceed --snr-min, got {snr_max}"),
            )?;
            let step = r.or(a.step, "step", 0.01)?;
            check(step.is_finite() && step > 0.0, "step", format!("must be > 0, got {step}"))?;
            let quadrature = quadrature(r.or(a.abs_tol, "abs-tol", default_abs_tol())?)?;
            let workers = r.get(a.workers, "workers")?;
            check(workers != Some(0), "workers", "must be >= 1")?;
            let spec = SweepSpec {
                ratio,
                snr_min,
                snr_max,
                step,
                quadrature,
                output_path: r.get(a.out, "out")?,
            };
            spec.validate()
                .map_err(|e| usage(format!("--step: {e}")))?;
            Ok(Invocation::Sweep { spec, workers })
        }
        CommandArgs::Crossover(a) => {
            let r = Resolver::load(&a.common)?;
            let ratio = r.or(a.ratio, "ratio", DEFAULT_RATIO)?;
            check_ratio(ratio)?;
            let snr_hi = r.or(a.snr_hi, "snr-hi", 1.0)?;
            check(
                snr_hi.is_finite() && snr_hi > 0.0,
                "snr-hi",
                format!("must be > 0, got {snr_hi}"),
            )?;
            let tol = r.or(a.tol, "tol", 1e-4)?;
            check(tol.is_finite() && tol > 0.0, "tol", format!("must be > 0, got {tol}"))?;
            let quadrature = quadrature(r.or(a.abs_tol, "abs-tol", default_abs_tol())?)?;
            Ok(Invocation::Crossover {
                ratio,
                snr_hi,
                tol,
                quadrature,
            })
        }
        CommandArgs::Simulate(a) => {
            let r = Resolver::load(&a.common)?;
            let ratio = r.or(a.ratio, "ratio", DEFAULT_RATIO)?;
            check_ratio(ratio)?;
            let snr = r
                .get(a.snr, "snr")?
                .ok_or_else(|| usage("--snr: required"))?;
            check(snr.is_finite() && snr > 0.0, "snr", format!("must be > 0, got {snr}"))?;
            let symbols = r.or(a.symbols, "symbols", 1_000_000)?;
            check(symbols >= 1, "symbols", "must be >= 1")?;
            let seed = r.or(a.seed, "seed", 0)?;
            let mode: String = r.or(a.mode, "mode", "genie".to_owned())?;
            let mode = CancellationMode::from_str(&mode).map_err(|e| usage(format!("--mode: {e}")))?;
            let config =
                SimConfig::new(symbols, seed, mode).map_err(|e| usage(format!("--symbols: {e}")))?;
            Ok(Invocation::Simulate { ratio, snr, config })
        }
        CommandArgs::Mi(a) => {
            let r = Resolver::load(&a.common)?;
            let raw: String = r
                .get(a.points, "points")?
                .ok_or_else(|| usage("--points: required"))?;
            let points = parse_points(&raw).map_err(|e| usage(format!("--points: {e}")))?;
            let sigma2 = r.or(a.sigma2, "sigma2", 1.0)?;
            check(
                sigma2.is_finite() && sigma2 > 0.0,
                "sigma2",
                format!("must be > 0, got {sigma2}"),
            )?;
            let quadrature = quadrature(r.or(a.abs_tol, "abs-tol", default_abs_tol())?)?;
            Ok(Invocation::Mi {
                points,
                sigma2,
                quadrature,
            })
        }
    }
}

/// Runs a parsed invocation, writing reports to `stdout`.
pub fn execute(inv: &Invocation, stdout: &mut dyn Write) -> Result<(), CliError> {
    let compute = CliError::Compute;
    let io = |path: PathBuf| move |source| CliError::Compute(Error::Io { path, source });
    match inv {
        Invocation::Sweep { spec, workers } => {
            let rows = match workers {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(*n)
                    .build()
                    .map_err(|e| usage(format!("--workers: {e}")))?
                    .install(|| sweep(spec)),
                None => sweep(spec),
            }
            .map_err(compute)?;

            match &spec.output_path {
                Some(path) => {
                    let file = File::create(path).map_err(io(path.clone()))?;
                    write_csv(BufWriter::new(file), &rows).map_err(io(path.clone()))?;
                }
                None => write_csv(&mut *stdout, &rows).map_err(io("<stdout>".into()))?,
            }
            // Report the first failing grid point; the CSV marks every one.
            if let Some(Err((snr, e))) = rows.iter().find(|r| r.is_err()) {
                return Err(CliError::Compute(Error::Domain(format!(
                    "sweep point snr={snr} failed: {e}"
                ))));
            }
            Ok(())
        }
        Invocation::Crossover {
            ratio,
            snr_hi,
            tol,
            quadrature,
        } => {
            let c = find_crossover(*ratio, *snr_hi, *tol, quadrature).map_err(compute)?;
            write_report(
                stdout,
                &[
                    ("ratio", format_sig9(*ratio)),
                    ("snr_cross", format_sig9(c.snr_cross)),
                    ("bracket_lo", format_sig9(c.bracket_lo)),
                    ("bracket_hi", format_sig9(c.bracket_hi)),
                    ("iterations", c.iterations.to_string()),
                ],
            )
        }
        Invocation::Simulate { ratio, snr, config } => {
            let params = CocktailParams::unit_energy(*ratio).map_err(compute)?;
            let channel = params.noise_for_snr(*snr).map_err(compute)?.in_phase();
            let r = simulate(&params, channel, config);
            write_report(
                stdout,
                &[
                    ("ratio", format_sig9(*ratio)),
                    ("snr", format_sig9(*snr)),
                    ("mode", config.cancellation_mode.to_string()),
                    ("seed", config.seed.to_string()),
                    ("symbols", r.symbols.to_string()),
                    ("errors_layer1", r.errors_layer1.to_string()),
                    ("errors_layer2", r.errors_layer2.to_string()),
                    ("ber_layer1", format_sig9(r.ber_layer1)),
                    ("ber_layer2", format_sig9(r.ber_layer2)),
                    ("stderr_ber1", format_sig9(r.stderr_ber1)),
                    ("stderr_ber2", format_sig9(r.stderr_ber2)),
                    ("ber_analytic_layer1", format_sig9(ber_analytic_layer1(&params, channel))),
                    (
                        "ber_analytic_layer2_genie",
                        format_sig9(ber_analytic_layer2_genie(&params, channel)),
                    ),
                    ("mi_sample_total_bits", format_sig9(r.mi_sample_total_bits)),
                ],
            )
        }
        Invocation::Mi {
            points,
            sigma2,
            quadrature,
        } => {
            let c = Constellation::equiprobable(points.clone()).map_err(compute)?;
            let noise = NoiseSpec::new(*sigma2).map_err(compute)?;
            let mi = mi_discrete_awgn(&c, noise, quadrature).map_err(compute)?;
            write_report(
                stdout,
                &[
                    ("mi_bits", format_sig9(mi.value_bits)),
                    ("est_error_bits", format_sig9(mi.est_error_bits)),
                    ("evaluations", mi.evaluations.to_string()),
                ],
            )
        }
    }
}

fn write_report(out: &mut dyn Write, fields: &[(&str, String)]) -> Result<(), CliError> {
    let mut write = || -> std::io::Result<()> {
        for (k, v) in fields {
            writeln!(out, "{k} = {v}")?;
        }
        out.flush()
    };
    write().map_err(|source| {
        CliError::Compute(Error::Io {
            path: "<stdout>".into(),
            source,
        })
    })
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn run_cli<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let result = parse_invocation(argv).and_then(|inv| execute(&inv, stdout));
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Info(text)) => {
            let _ = write!(stdout, "{text}");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

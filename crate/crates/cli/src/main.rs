use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use osc_povm::analysis::ComparisonSpec;
use osc_povm_cli::config::{wavelength_settings, DEFAULT_WAVELENGTH_POINTS, DEFAULT_X_RANGE};
use osc_povm_cli::units::{parse_quantity, Kind};
use osc_povm_cli::{output, parse_config, run_scenario, Format, Mode, ScenarioConfig};

/// Thread count for the grid sweeps; unset means one per core.
const THREADS_VAR: &str = "OSC_POVM_THREADS";

#[derive(Parser)]
#[command(name = "osc-povm", version, about = "Oscillation detection probabilities under time-of-arrival measurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its curves.
    Run(RunArgs),
    /// Parse and validate a scenario file without running it.
    Check { config: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    #[command(subcommand)]
    mode: Option<ModeArgs>,
    /// Scenario file, TOML or JSON.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Abort with exit code 3 on any regime flag.
    #[arg(long, global = true, conflicts_with = "permissive")]
    strict: bool,
    /// Report regime flags as warnings and keep going.
    #[arg(long, global = true)]
    permissive: bool,
}

#[derive(Subcommand)]
enum ModeArgs {
    /// Arrival-time density of one or two Gaussian packets.
    Toa,
    /// Detection probability against baseline.
    Curve,
    /// Oscillation wavelength against energy over threshold.
    Wavelength {
        /// Threshold energy, e.g. 1.0MeV.
        #[arg(long)]
        eth: Option<String>,
        #[arg(long)]
        emax_ratio: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Event distributions of the standard and threshold formulas and their
    /// statistical distance.
    Compare {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        x_lo: Option<f64>,
        #[arg(long)]
        x_hi: Option<f64>,
    },
    /// Incoherent mixture of shifted packets.
    Mixed,
    /// Weighted sum over detection channels.
    Channels,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

fn config_failure(message: impl ToString) -> Failure {
    Failure { code: 1, message: message.to_string() }
}

fn empty_config() -> ScenarioConfig {
    osc_povm_cli::parse_toml("").expect("empty config is valid")
}

fn apply_overrides(cfg: &mut ScenarioConfig, args: &RunArgs) -> Result<Option<Mode>, Failure> {
    if args.strict {
        cfg.run.strict = true;
    }
    if args.permissive {
        cfg.run.strict = false;
    }
    let Some(mode) = &args.mode else { return Ok(None) };
    Ok(Some(match mode {
        ModeArgs::Toa => Mode::Toa,
        ModeArgs::Curve => Mode::Curve,
        ModeArgs::Mixed => Mode::Mixed,
        ModeArgs::Channels => Mode::Channels,
        ModeArgs::Wavelength { eth, emax_ratio, points } => {
            if eth.is_some() || emax_ratio.is_some() || points.is_some() {
                let eth = match eth {
                    Some(text) => parse_quantity(text, Kind::Energy).map_err(|m| config_failure(format!("--eth: {m}")))?,
                    None => cfg.wavelength.map(|w| w.eth).ok_or_else(|| config_failure("--eth is required"))?,
                };
                let ratio = emax_ratio
                    .or(cfg.wavelength.map(|w| w.emax_ratio))
                    .ok_or_else(|| config_failure("--emax-ratio is required"))?;
                let n = points.or(cfg.wavelength.map(|w| w.points)).unwrap_or(DEFAULT_WAVELENGTH_POINTS);
                cfg.wavelength = Some(wavelength_settings(eth, ratio, n).map_err(config_failure)?);
            }
            Mode::Wavelength
        }
        ModeArgs::Compare { alpha, x_lo, x_hi } => {
            if alpha.is_some() || x_lo.is_some() || x_hi.is_some() {
                let base = cfg.compare;
                let alpha = alpha.or(base.map(|c| c.alpha)).ok_or_else(|| config_failure("--alpha is required"))?;
                let lo = x_lo.or(base.map(|c| c.x_lo)).unwrap_or(DEFAULT_X_RANGE.0);
                let hi = x_hi.or(base.map(|c| c.x_hi)).unwrap_or(DEFAULT_X_RANGE.1);
                cfg.compare = Some(ComparisonSpec::resolved(alpha, lo, hi).map_err(config_failure)?);
            }
            Mode::Compare
        }
    }))
}

fn format_for(args: &RunArgs, cfg: &ScenarioConfig) -> Format {
    let from_ext = || {
        args.out.as_deref().and_then(Path::extension).and_then(|e| e.to_str()).map(|e| match e {
            "json" => Format::Json,
            _ => Format::Csv,
        })
    };
    args.format.or(cfg.run.format).or_else(from_ext).unwrap_or_default()
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(text) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| config_failure(format!("{THREADS_VAR} = '{text}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(config_failure)
}

fn run(args: RunArgs) -> Result<(), Failure> {
    configure_threads()?;
    let mut cfg = match &args.config {
        Some(path) => parse_config(path).map_err(config_failure)?,
        None => empty_config(),
    };
    let mode = apply_overrides(&mut cfg, &args)?;
    let curves = run_scenario(&cfg, mode).map_err(|e| Failure { code: e.exit_code(), message: e.to_string() })?;
    for f in osc_povm_cli::run::merge_flags(curves.iter().flat_map(|c| &c.meta.flags)) {
        eprintln!("warning: {f}");
    }
    let text = match format_for(&args, &cfg) {
        Format::Csv => output::to_csv(&curves),
        Format::Json => output::to_json(&curves),
    };
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| config_failure(format!("cannot write {}: {e}", path.display()))),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(config_failure(e)),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Check { config } => parse_config(&config).map(|_| println!("ok")).map_err(config_failure),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

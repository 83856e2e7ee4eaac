use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rv_root_music::cli::{
    self, cmd_estimate, cmd_roots, cmd_sweep, cmd_verify, resolve_config, Overrides, SnrSpec,
};
use rv_root_music::experiments::SweepVariable;
use rv_root_music::oracles::VerifyLevel;

/// Real-valued root-MUSIC DOA estimation with first-order error
/// prediction. Exit codes: 0 success, 1 usage or config error,
/// 2 estimation failure, 3 verification failure, 4 I/O error.
#[derive(Parser)]
#[command(name = "rv-root-music", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Flat key = value configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path for commands that write files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; per-trial streams derive from (seed, trial index)
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per sweep point
    #[arg(long)]
    trials: Option<usize>,
    /// Array element count L
    #[arg(long)]
    elements: Option<usize>,
    /// Element spacing as a fraction of the wavelength
    #[arg(long)]
    spacing: Option<f64>,
    /// Source angles in degrees, comma separated
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    angles: Option<F64List>,
    /// Snapshot count M
    #[arg(long)]
    snapshots: Option<usize>,
    /// SNR in dB: one value, or start:step:stop for sweeps
    #[arg(long, value_parser = SnrSpec::parse, allow_hyphen_values = true)]
    snr: Option<SnrSpec>,
    /// Noise power sigma_n^2 (overrides --snr)
    #[arg(long, allow_hyphen_values = true)]
    noise_power: Option<f64>,
    /// Worker threads for Monte Carlo trials (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Default)]
struct SweepArgs {
    /// What to sweep: snr_db or snapshots
    #[arg(long, value_parser = parse_sweep_variable)]
    sweep_variable: Option<SweepVariable>,
    /// Sweep values, comma separated
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    sweep_values: Option<F64List>,
    /// Source whose estimation error is tracked (default: first angle)
    #[arg(long, allow_hyphen_values = true)]
    tracked: Option<f64>,
}

fn parse_sweep_variable(s: &str) -> Result<SweepVariable, String> {
    match s {
        "snr_db" => Ok(SweepVariable::SnrDb),
        "snapshots" => Ok(SweepVariable::Snapshots),
        _ => Err(format!("'{s}' is not 'snr_db' or 'snapshots'")),
    }
}

/// Comma-separated float list, wrapped so clap treats it as one value.
#[derive(Clone)]
struct F64List(Vec<f64>);

fn parse_list(s: &str) -> Result<F64List, String> {
    cli::parse_f64_list(s).map(F64List)
}

#[derive(Subcommand)]
enum Command {
    /// Estimate DOAs for one synthesized scenario
    Estimate {
        #[command(flatten)]
        common: CommonArgs,
        /// Emit the root diagnostics as JSON
        #[arg(long)]
        json_roots: bool,
        /// Print the eigen-spectrum and the full root table
        #[arg(long)]
        details: bool,
    },
    /// Monte Carlo RMSE sweep over SNR or snapshot count (CSV output)
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Noiseless root-locus export (CSV output)
    Roots {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the self-verification oracle suites
    Verify {
        /// quick finishes in seconds; full runs acceptance strength
        #[arg(long, default_value = "quick", value_parser = parse_level)]
        level: VerifyLevel,
        /// Worker threads
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn parse_level(s: &str) -> Result<VerifyLevel, String> {
    match s {
        "quick" => Ok(VerifyLevel::Quick),
        "full" => Ok(VerifyLevel::Full),
        _ => Err(format!("'{s}' is not 'quick' or 'full'")),
    }
}

fn overrides_from(common: CommonArgs, sweep: Option<SweepArgs>) -> Overrides {
    let sweep = sweep.unwrap_or_default();
    Overrides {
        config: common.config,
        elements: common.elements,
        spacing: common.spacing,
        angles_deg: common.angles.map(|l| l.0),
        snapshots: common.snapshots,
        snr: common.snr,
        noise_power: common.noise_power,
        seed: common.seed,
        trials: common.trials,
        sweep_variable: sweep.sweep_variable,
        sweep_values: sweep.sweep_values.map(|l| l.0),
        tracked_source_deg: sweep.tracked,
        out: common.out,
        workers: common.workers,
    }
}

fn run(cli: Cli) -> rv_root_music::error::Result<()> {
    match cli.command {
        Command::Estimate {
            common,
            json_roots,
            details,
        } => {
            let cfg = resolve_config(&overrides_from(common, None))?;
            cmd_estimate(&cfg, json_roots, details, &mut std::io::stdout())
        }
        Command::Sweep { common, sweep } => {
            let cfg = resolve_config(&overrides_from(common, Some(sweep)))?;
            cmd_sweep(&cfg)
        }
        Command::Roots { common } => {
            let cfg = resolve_config(&overrides_from(common, None))?;
            cmd_roots(&cfg)
        }
        Command::Verify { level, workers } => cmd_verify(level, workers, &mut std::io::stdout()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let requested = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if requested {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cswap_cli::config::{ExperimentConfig, OutputFormat, Variant};
use cswap_cli::error::CliError;
use cswap_cli::report::{sweep_to_csv, sweep_to_json};
use cswap_cli::runner;
use cswap_core::protocol::ControlMode;

#[derive(Parser)]
#[command(
    name = "cswap",
    version,
    about = "Controlled-SWAP weak value estimation toolkit",
    after_help = "Set CSWAP_TOL to override the default validation tolerance (1e-10)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate exact weak values, no sampling (variant: exact)
    Exact(RunArgs),
    /// Monte Carlo estimation on a circuit variant (fig1a..fig1d)
    Estimate(RunArgs),
    /// Sample-size planning from the error bound (variant: plan)
    Plan(RunArgs),
    /// Two-time state analysis of a bipartite state (variant: twotime)
    Twotime(RunArgs),
    /// Purification constructions and overlaps (variant: purify)
    Purify(RunArgs),
    /// Run the config once per value of a swept parameter
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment config
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (run reports: json; sweeps: json or csv)
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Override the control measurement realization
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// JSON pointer to the swept config field (e.g. /k, /epsilon, /rho_joint/p)
    #[arg(long)]
    axis: String,
    /// Comma-separated numeric values for the axis; empty produces an empty table
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    values: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Split,
    Random4,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

impl From<ModeArg> for ControlMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Split => ControlMode::Split,
            ModeArg::Random4 => ControlMode::Random4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if let Some(hint) = err.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Exact(args) => run_single(args, &[Variant::Exact]),
        Command::Estimate(args) => run_single(
            args,
            &[
                Variant::Fig1a,
                Variant::Fig1b,
                Variant::Fig1c,
                Variant::Fig1d,
            ],
        ),
        Command::Plan(args) => run_single(args, &[Variant::Plan]),
        Command::Twotime(args) => run_single(args, &[Variant::Twotime]),
        Command::Purify(args) => run_single(args, &[Variant::Purify]),
        Command::Sweep(args) => run_sweep(args),
    }
}

fn load_config(path: &Path) -> Result<(ExperimentConfig, serde_json::Value), CliError> {
    let text = std::fs::read_to_string(path)?;
    let raw: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::config(path.display().to_string(), e))?;
    let config: ExperimentConfig = serde_json::from_value(raw.clone())
        .map_err(|e| CliError::config(path.display().to_string(), e))?;
    Ok((config, raw))
}

fn apply_overrides(config: &mut ExperimentConfig, args: &RunArgs) {
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(mode) = args.mode {
        config.mode = Some(mode.into());
    }
}

fn check_variant(config: &ExperimentConfig, allowed: &[Variant]) -> Result<(), CliError> {
    if allowed.contains(&config.variant) {
        Ok(())
    } else {
        Err(CliError::config(
            "variant",
            format!(
                "this subcommand handles {allowed:?}, config says {:?}",
                config.variant
            ),
        ))
    }
}

fn run_single(args: RunArgs, allowed: &[Variant]) -> Result<(), CliError> {
    let (mut config, _) = load_config(&args.config)?;
    apply_overrides(&mut config, &args);
    check_variant(&config, allowed)?;
    if matches!(args.format, Some(FormatArg::Csv)) {
        return Err(CliError::config(
            "--format",
            "csv output applies to sweep only",
        ));
    }
    let started = Instant::now();
    let report = runner::run(&config)?;
    let text = report.to_json()?;
    emit(&text, args.out.as_deref())?;
    eprintln!(
        "completed in {:.1} ms",
        started.elapsed().as_secs_f64() * 1e3
    );
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<(), CliError> {
    let (mut config, mut raw) = load_config(&args.run.config)?;
    apply_overrides(&mut config, &args.run);
    // propagate CLI overrides into the raw document the sweep patches
    if let Some(seed) = args.run.seed {
        raw["seed"] = serde_json::Value::from(seed);
    }
    if let Some(mode) = args.run.mode {
        let mode: ControlMode = mode.into();
        raw["mode"] = serde_json::to_value(mode).map_err(|e| CliError::Serde(e.to_string()))?;
    }
    let values = parse_values(&args.values)?;
    let started = Instant::now();
    let results = runner::sweep(&raw, &args.axis, &values)?;
    let rows: Vec<_> = results.into_iter().map(|(_, row)| row).collect();
    let format = args
        .run
        .format
        .map(OutputFormat::from)
        .unwrap_or(OutputFormat::Csv);
    let text = match format {
        OutputFormat::Csv => sweep_to_csv(&rows)?,
        OutputFormat::Json => sweep_to_json(&rows)?,
    };
    emit(&text, args.run.out.as_deref())?;
    eprintln!(
        "swept {} values in {:.1} ms",
        rows.len(),
        started.elapsed().as_secs_f64() * 1e3
    );
    Ok(())
}

fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| CliError::config("--values", format!("`{s}`: {e}")))
        })
        .collect()
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            file.write_all(text.as_bytes())?;
        }
        None => {
            print!("{text}");
        }
    }
    Ok(())
}

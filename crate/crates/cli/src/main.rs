use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::CliError;
use eitfiber::config::{presets, Scenario};

/// Dressed-mode, group-velocity and beam-propagation solver for a nanofiber
/// in an EIT medium.
#[derive(Debug, Parser)]
#[command(name = "eitfiber", version, arg_required_else_help = true)]
struct Cli {
    #[command(flatten)]
    source: Source,

    /// Output directory.
    #[arg(long, global = true, env = "EITFIBER_OUT", default_value = ".")]
    out: PathBuf,

    /// Worker threads for scans (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Print the resolved scenario as canonical TOML and exit.
    #[arg(long)]
    dump_config: bool,

    /// Also write a gnuplot script next to each CSV.
    #[arg(long, global = true)]
    gnuplot_script: bool,

    /// Record the run time in CSV headers.
    #[arg(long, global = true)]
    timestamp: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct Source {
    /// Built-in scenario (fig2, ortho_h2).
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Scenario file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the bare and dressed probe modes.
    Mode {
        /// Probe detuning, e.g. "0.5 gamma" (default: scan.operating_detuning).
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
    },
    /// Sweep the probe detuning with and without the control field.
    Scan,
    /// Group velocity and delay at the operating detuning.
    Vg {
        /// Medium length, e.g. "50um".
        #[arg(long)]
        length: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
    },
    /// Beam propagation through the dressed fiber.
    Bpm {
        /// Propagation length, e.g. "200um".
        #[arg(long)]
        length: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
    },
    /// Compare built-in scenarios with the published numbers.
    Check,
}

fn load(source: &Source) -> Result<Scenario, CliError> {
    match (&source.preset, &source.config) {
        (Some(name), None) => Ok(presets::load(name)?),
        (None, Some(path)) => Ok(Scenario::load(path)?),
        _ => Err(CliError::Usage("give --preset NAME or --config PATH".into())),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if matches!(cli.command, Some(Command::Check)) {
        return commands::check(&cli.out);
    }
    let scenario = load(&cli.source)?;
    if cli.dump_config {
        print!("{}", scenario.to_toml());
        return Ok(());
    }
    let out = commands::Output { dir: cli.out.clone(), gnuplot: cli.gnuplot_script, timestamp: cli.timestamp };
    let wrap = |e: CliError| e.in_scenario(&scenario.name);
    match cli.command {
        None => Err(CliError::Usage("no command given (mode, scan, vg, bpm, check)".into())),
        Some(Command::Mode { delta }) => commands::mode(&scenario, delta.as_deref(), &out).map_err(wrap),
        Some(Command::Scan) => commands::scan(&scenario, &out).map_err(wrap),
        Some(Command::Vg { length, delta }) => {
            commands::vg(&scenario, length.as_deref(), delta.as_deref(), &out).map_err(wrap)
        }
        Some(Command::Bpm { length, delta }) => {
            commands::bpm(&scenario, length.as_deref(), delta.as_deref(), &out).map_err(wrap)
        }
        Some(Command::Check) => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

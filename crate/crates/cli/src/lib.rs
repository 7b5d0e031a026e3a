//! Command-line driver: loads a system configuration, runs one subcommand,
//! and writes a CSV table plus a JSON sidecar.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use survivordim_core::{Error, Result};

use crate::commands::{CommandOutput, MeasureChoice};
use crate::config::{LoadedSystem, SystemConfig};
use crate::output::Sidecar;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "survivordim",
    version,
    about = "Dimensions, pressures and escape rates of self-affine sets with cylinder holes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// System configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// First hole depth of a scan; overrides [scan] q_min.
    #[arg(long)]
    pub q_min: Option<usize>,
    /// Last hole depth of a scan; overrides [scan] q_max.
    #[arg(long)]
    pub q_max: Option<usize>,
    /// Downgrade the strict-mode norm bound to a warning.
    #[arg(long)]
    pub allow_weak: bool,
    /// Directory for `<command>.csv` and `<command>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// What to print on standard output.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zero s0 of the pressure, the dimension min(d, s0) and per-permutation zeros.
    Dim {
        #[command(flatten)]
        common: Common,
    },
    /// Survivor-set dimension for the hole cut at depth q.
    Survivor {
        #[command(flatten)]
        common: Common,
        /// Hole depth; defaults to q_max.
        #[arg(long)]
        q: Option<usize>,
    },
    /// Escape rates of a Bernoulli measure along the scan range.
    Escape {
        #[command(flatten)]
        common: Common,
        /// `kaenmaki`, `d=<permutation>` (e.g. `d=21`) or weights (e.g. `1/3,2/3`).
        #[arg(long, default_value = "kaenmaki")]
        measure: String,
    },
    /// Pressure and reduced pressure on a grid of s in [0, d].
    PressureCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Hole depth for the reduced pressure; defaults to q_max.
        #[arg(long)]
        q: Option<usize>,
        /// Also write `pressure-curve.svg` into the output directory.
        #[arg(long)]
        svg: bool,
    },
    /// Dimension deficit against its predicted asymptotics.
    Deficit {
        #[command(flatten)]
        common: Common,
    },
    /// Escape rate over hole mass against its predicted limit.
    FpRatio {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "kaenmaki")]
        measure: String,
    },
    /// Built-in identity checks; exits with 3 if any fails.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Dim { common }
            | Command::Survivor { common, .. }
            | Command::Escape { common, .. }
            | Command::PressureCurve { common, .. }
            | Command::Deficit { common }
            | Command::FpRatio { common, .. }
            | Command::Verify { common } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Dim { .. } => "dim",
            Command::Survivor { .. } => "survivor",
            Command::Escape { .. } => "escape",
            Command::PressureCurve { .. } => "pressure-curve",
            Command::Deficit { .. } => "deficit",
            Command::FpRatio { .. } => "fp-ratio",
            Command::Verify { .. } => "verify",
        }
    }
}

/// Exit status for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

/// Parse `args` (including the program name), run, and return the exit
/// status. Diagnostics go to `stderr`, results to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = err.render().to_string();
            let _ = if err.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match execute(&cli.command, stdout, stderr) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_NUMERICAL,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            exit_code(&err)
        }
    }
}

fn scan_range(common: &Common, sys: &LoadedSystem) -> Result<RangeInclusive<usize>> {
    let lo = common.q_min.unwrap_or(sys.scan.q_min);
    let hi = common.q_max.unwrap_or(sys.scan.q_max);
    if lo == 0 || lo > hi {
        return Err(Error::validation(None, format!("q range {lo}..{hi} is empty or starts at 0")));
    }
    Ok(lo..=hi)
}

fn execute(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool> {
    let common = command.common();
    let config = SystemConfig::load(&common.config)?;
    let sys = config.build(common.allow_weak)?;
    for w in &sys.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    let range = scan_range(common, &sys)?;
    let default_q = *range.end();
    let output: CommandOutput = match command {
        Command::Dim { .. } => commands::dim(&sys)?,
        Command::Survivor { q, .. } => commands::survivor(&sys, q.unwrap_or(default_q))?,
        Command::Escape { measure, .. } => {
            commands::escape(&sys, &MeasureChoice::parse(measure)?, range)?
        }
        Command::PressureCurve { points, q, svg, .. } => {
            if *svg && common.out.is_none() {
                return Err(Error::validation(None, "--svg needs --out"));
            }
            commands::pressure_curve(&sys, *points, *q, *svg)?
        }
        Command::Deficit { .. } => commands::deficit(&sys, range)?,
        Command::FpRatio { measure, .. } => {
            commands::fp_ratio(&sys, &MeasureChoice::parse(measure)?, range)?
        }
        Command::Verify { .. } => commands::verify(&sys, range)?,
    };
    let sidecar = Sidecar {
        tool: "survivordim",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        config: &config,
        warnings: &sys.warnings,
        result: &output.result,
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Internal(format!("cannot serialize sidecar: {e}")))?;
    if let Some(dir) = &common.out {
        write_outputs(dir, command.name(), &output, &json)?;
    }
    match common.format {
        Format::Csv => output
            .table
            .write_csv(&mut *stdout)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?,
        Format::Json => writeln!(stdout, "{json}")?,
    }
    if !output.passed {
        writeln!(stderr, "verify: at least one check failed")?;
    }
    Ok(output.passed)
}

fn write_outputs(dir: &Path, name: &str, output: &CommandOutput, json: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let csv = std::fs::File::create(dir.join(format!("{name}.csv")))?;
    output
        .table
        .write_csv(csv)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(dir.join(format!("{name}.json")), format!("{json}\n"))?;
    if let Some(svg) = &output.svg {
        std::fs::write(dir.join(format!("{name}.svg")), svg)?;
    }
    Ok(())
}

//! Command-line front end.

pub mod commands;
pub mod config;
pub mod verify;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{ConfigError, RunConfig};

use crate::error::Error;
use crate::field::{write_atomic, Cf64File};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const VERIFICATION: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("{failed} of {points} scan points failed")]
    ScanFailures { failed: usize, points: usize },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Engine(Error::InvalidParameter { .. }) => exit::CONFIG,
            CliError::Engine(Error::Io(_) | Error::Format(_)) => exit::IO,
            CliError::Engine(_) | CliError::ScanFailures { .. } => exit::NUMERICAL,
            CliError::Verification(_) => exit::VERIFICATION,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "eit-thermal", version, about = "Thermal-motion effects in Lambda-system EIT")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Susceptibility or Ramsey spectrum on a detuning grid (CSV).
    Spectrum {
        #[arg(short, long)]
        config: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Measured and analytic EIT widths over a k grid and a list of gammas (CSV).
    FwhmScan {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Propagates a CF64 probe image through the medium.
    FilterImage {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Optional 8-bit magnitude preview (PGM).
        #[arg(long)]
        preview: Option<PathBuf>,
    },
    /// Stored or slow-light diffusion of a CF64 field.
    Evolve {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Overrides `evolve.t`.
        #[arg(short, long)]
        t: Option<f64>,
    },
    /// Runs the cross-oracle suites.
    Verify {
        /// Optional `[verify]` overrides.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Lists the suites without running them.
        #[arg(long)]
        list: bool,
        /// Writes the JSON report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Restricts the run to the named suites.
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Runs one parsed command.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { config, out } => {
            let cfg = RunConfig::load(&config)?;
            write_text(out.as_deref(), &commands::spectrum(&cfg)?)
        }
        Command::FwhmScan { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let scan = commands::fwhm_scan(&cfg)?;
            write_atomic(&out, scan.csv.as_bytes())?;
            if !scan.warnings.is_empty() {
                for w in &scan.warnings {
                    log::warn!("{w}");
                }
                let text = scan.warnings.join("\n") + "\n";
                write_atomic(&sidecar(&out, ".warnings.txt"), text.as_bytes())?;
            }
            if scan.failed_fraction() > commands::MAX_FAILED_FRACTION {
                return Err(CliError::ScanFailures { failed: scan.warnings.len(), points: scan.points });
            }
            Ok(())
        }
        Command::FilterImage { config, input, out, preview } => {
            let cfg = RunConfig::load(&config)?;
            let r = commands::filter_image(&cfg, Cf64File::read(&input)?)?;
            for w in &r.warnings {
                log::warn!("{w}");
            }
            r.file.write(&out)?;
            if let Some(p) = preview {
                write_atomic(&p, &commands::pgm_preview(&r.file))?;
            }
            Ok(())
        }
        Command::Evolve { config, input, out, t } => {
            let cfg = RunConfig::load(&config)?;
            let r = commands::evolve(&cfg, Cf64File::read(&input)?, t)?;
            Ok(r.file.write(&out)?)
        }
        Command::Verify { config, list, report, suites } => {
            if list {
                println!("{}", verify::SUITES.join("\n"));
                return Ok(());
            }
            if let Some(bad) = suites.iter().find(|s| !verify::SUITES.contains(&s.as_str())) {
                return Err(ConfigError::new("--suite", format!("unknown suite `{bad}`")).into());
            }
            let vcfg = match config {
                Some(p) => RunConfig::load(&p)?.verify.unwrap_or_default(),
                None => Default::default(),
            };
            let r = verify::run_all(&vcfg, &suites)?;
            let json = serde_json::to_string_pretty(&r).map_err(|e| Error::Format(e.to_string()))? + "\n";
            write_text(report.as_deref(), &json)?;
            if r.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = r.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
                Err(CliError::Verification(failed.join(", ")))
            }
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

mod check;
mod config;
mod output;
mod simulate;
mod sweep;
mod theory;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::SweepKind;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical abort: {m}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Library errors split by origin: numerics abort with 2, the rest are the
/// caller's inputs.
pub fn core_error(e: nslab::Error) -> CliError {
    match e {
        nslab::Error::Io(io) => CliError::Io(io),
        e if e.is_numerical() => CliError::Numerical(e.to_string()),
        e => CliError::Config(e.to_string()),
    }
}

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_PARTIAL: u8 = 3;
const EXIT_CHECK: u8 = 4;

#[derive(Parser)]
#[command(name = "nslab", version, about = "Navier-slip flow laboratory on the annulus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Nu,
    Alpha,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Identities,
    Hodge,
    Oracle,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a TOML config.
    Simulate { config: PathBuf },
    /// Viscosity or friction sweep from a TOML config with a [sweep] section.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Concurrent sweep rows.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Osgood rate curve and admissibility verdict for a growth profile.
    Theory {
        /// constant[:C], log[:C], power[:C[:gamma]] or snapshot:PATH
        #[arg(long)]
        profile: String,
        /// Sup bound M; snapshots default to (2 max|u|)^2, catalog profiles to 1.
        #[arg(long)]
        m: Option<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4,1e-5,1e-6")]
        nu_grid: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Constant in phi for snapshot profiles.
        #[arg(long, default_value_t = 0.05)]
        rate_c: f64,
        /// Inner circulation accompanying a snapshot.
        #[arg(long, default_value_t = 0.0)]
        circulation: f64,
    },
    /// Invariant suite at two resolutions.
    Check {
        #[arg(long, value_enum)]
        suite: Suite,
    },
}

fn report(e: CliError) -> ExitCode {
    eprintln!("nslab: {e}");
    ExitCode::from(match e {
        CliError::Numerical(_) => EXIT_NUMERICAL,
        CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Simulate { config } => match simulate::run(&config) {
            Ok(dir) => {
                println!("artifacts in {}", dir.display());
                ExitCode::SUCCESS
            }
            Err(e) => report(e),
        },
        Command::Sweep { config, kind, jobs } => {
            if jobs == 0 {
                return report(CliError::Config("--jobs must be at least 1".into()));
            }
            let kind = match kind {
                Kind::Nu => SweepKind::Nu,
                Kind::Alpha => SweepKind::Alpha,
            };
            match sweep::run(&config, kind, jobs) {
                Ok((dir, failed)) => {
                    println!("artifacts in {}", dir.display());
                    if failed > 0 {
                        ExitCode::from(EXIT_PARTIAL)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => report(e),
            }
        }
        Command::Theory {
            profile,
            m,
            nu_grid,
            r,
            t,
            rate_c,
            circulation,
        } => {
            let args = theory::TheoryArgs {
                profile,
                m,
                nu_grid,
                r,
                t,
                rate_c,
                circulation,
            };
            match theory::run(&args) {
                Ok(dir) => {
                    println!("artifacts in {}", dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => report(e),
            }
        }
        Command::Check { suite } => {
            let (name, result) = match suite {
                Suite::Identities => ("identities", check::identities()),
                Suite::Hodge => ("hodge", check::hodge()),
                Suite::Oracle => ("oracle", check::oracle()),
            };
            match result {
                Ok(checks) => {
                    check::print_table(name, &checks);
                    if checks.iter().all(|c| c.pass) {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_CHECK)
                    }
                }
                Err(e) => {
                    eprintln!("nslab: check {name} aborted: {e}");
                    ExitCode::from(EXIT_CHECK)
                }
            }
        }
    }
}

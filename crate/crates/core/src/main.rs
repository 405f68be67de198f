use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ibstring::cli_io::{self, Level};
use ibstring::Error;

/// Spectral contour dynamics for an elastic string in 2-D Stokes flow.
#[derive(Parser)]
#[command(name = "ibstring", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a JSON configuration.
    Simulate { config: PathBuf },
    /// Sample velocity and pressure around a snapshot on the configured lattice.
    Field { config: PathBuf, snapshot: PathBuf },
    /// Print the linearized spectrum for wavenumbers 0..=K as CSV.
    Spectrum { k: u32 },
    /// Fit the closest equilibrium to a snapshot.
    Fit { snapshot: PathBuf },
    /// Run the self-verification suite.
    Verify {
        /// Include the long time-integration checks.
        #[arg(long)]
        full: bool,
    },
}

const EXIT_VERIFY_FAILED: u8 = 5;

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("IBSTRING_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| Error::Config {
        path: "IBSTRING_THREADS".into(),
        message: format!("expected a nonnegative integer, got `{v}`"),
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config {
                path: "IBSTRING_THREADS".into(),
                message: e.to_string(),
            })?;
    }
    Ok(())
}

fn config_dir(path: &std::path::Path) -> PathBuf {
    path.parent().map(PathBuf::from).unwrap_or_default()
}

fn run(cli: Cli) -> Result<u8, Error> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { config } => {
            let cfg = cli_io::load_config(&config)?;
            let initial = cfg.build_initial(&config_dir(&config))?;
            let summary = cli_io::cmd_simulate(&cfg, &initial)?;
            println!(
                "{} steps written to {}",
                summary.steps,
                summary.output_dir.display()
            );
        }
        Command::Field { config, snapshot } => {
            let cfg = cli_io::load_config(&config)?;
            let path = cli_io::cmd_field(&cfg, &snapshot)?;
            println!("{}", path.display());
        }
        Command::Spectrum { k } => print!("{}", cli_io::cmd_spectrum(k)),
        Command::Fit { snapshot } => print!("{}", cli_io::cmd_fit(&snapshot)?.render()),
        Command::Verify { full } => {
            let report = cli_io::cmd_verify(if full { Level::Full } else { Level::Quick });
            print!("{}", report.render());
            if !report.passed() {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

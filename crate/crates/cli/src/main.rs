//! `amrc`: compress, decompress and inspect gridded data with error-bounded adaptive coarsening.

mod commands;
mod sidecar;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Corrupt(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Corrupt(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Corrupt(m) => write!(f, "corrupt artifact: {m}"),
        }
    }
}

impl From<amrc::Error> for CliError {
    fn from(e: amrc::Error) -> Self {
        use amrc::Error::*;
        match e {
            Config(_) | InvalidShape(_) | Range(_) | Domain(_) | Logic(_) => CliError::Usage(e.to_string()),
            Data(_) | Shape(_) | Encode(_) => CliError::Data(e.to_string()),
            CorruptArtifact { .. } | CorruptStream(_) | Unsupported(_) => CliError::Corrupt(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "amrc", version, about = "Error-bounded lossy compression by adaptive mesh coarsening")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress raw row-major arrays into an .amrc artifact.
    #[command(group(ArgGroup::new("criterion").required(true).args(["abs", "rel"])))]
    Compress {
        /// Raw little-endian input; repeat for several variables on the same grid.
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        /// Sidecar metadata (key=value lines).
        #[arg(long)]
        meta: PathBuf,
        /// Absolute point-wise error bound in physical units.
        #[arg(long)]
        abs: Option<f64>,
        /// Relative point-wise error bound as a fraction (at most 1).
        #[arg(long)]
        rel: Option<f64>,
        /// Region with its own bound, e.g. `0:8,0:8=0.0` (array axis order, half-open).
        #[arg(long)]
        domain: Vec<String>,
        #[arg(long, default_value = "one-for-one")]
        mode: String,
        /// Compress a 3D field as independent 2D slices along this axis.
        #[arg(long)]
        split_axis: Option<usize>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Reconstruct raw arrays from an artifact.
    Decompress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Summarize an artifact.
    Info {
        #[arg(long)]
        input: PathBuf,
    },
    /// Compress synthetic fields over a list of bounds and print a CSV table.
    Sweep {
        #[arg(long, default_value = "smooth")]
        generator: String,
        /// Grid extents, comma separated.
        #[arg(long, default_value = "64,64")]
        dims: String,
        /// Bounds to try, comma separated.
        #[arg(long, default_value = "0,0.1,1,10")]
        errors: String,
        #[arg(long, default_value = "abs")]
        criterion: String,
        #[arg(long)]
        split_axis: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compress {
            input,
            meta,
            abs,
            rel,
            domain,
            mode,
            split_axis,
            output,
        } => {
            let req = commands::CompressRequest {
                inputs: input,
                meta,
                abs,
                rel,
                domains: domain,
                mode,
                split_axis,
                output,
            };
            let stats = commands::compress(&req)?;
            println!("{stats}");
        }
        Command::Decompress { input, output } => commands::decompress(&input, &output)?,
        Command::Info { input } => print!("{}", commands::info(&input)?),
        Command::Sweep {
            generator,
            dims,
            errors,
            criterion,
            split_axis,
            seed,
        } => {
            let req = commands::SweepRequest {
                generator,
                dims: commands::parse_list(&dims, "dims")?,
                errors: commands::parse_list(&errors, "errors")?,
                criterion,
                split_axis,
                seed,
            };
            print!("{}", commands::sweep(&req)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("amrc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bosefield::locality::DEFAULT_SAMPLE_SEED;
use bosefield_cli::{load_model, max_dim_from_env, run, CliError, Outcome, Params, RunConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bosefield", version, about = "Free bose fields on finite oscillator networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Model spec: a JSON file or an inline JSON object.
    #[arg(long)]
    model: String,
    /// Output file, written atomically; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// ω(k)² on the reciprocal grid, cross-checked against the spectrum of Ω².
    Dispersion {
        #[command(flatten)]
        common: Common,
    },
    /// Classical trajectory on an evenly spaced time grid.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Initial displacements, comma separated; defaults to e₀.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        q: Option<Vec<f64>>,
        /// Initial momenta, comma separated; defaults to zero.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        p: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t_end: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Strong non-locality verdict, localization search and degree probe.
    Locality {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        region: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        quanta: usize,
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_SEED)]
        seed: u64,
    },
    /// Infrared membership of δ₀ in the scale space K_λ.
    Infrared {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
    },
    /// Vacuum covariance and the Newton-Wigner comparison.
    Vacuum {
        #[command(flatten)]
        common: Common,
        /// Sites where the extra quantum is placed; defaults to 0.
        #[arg(long, value_delimiter = ',')]
        region: Option<Vec<usize>>,
        #[arg(long, default_value_t = 2)]
        cutoff: usize,
    },
}

fn split(command: Command) -> (Common, Params) {
    match command {
        Command::Dispersion { common } => (common, Params::Dispersion),
        Command::Evolve { common, q, p, t_end, steps } => (common, Params::Evolve { q, p, t_end, steps }),
        Command::Locality { common, region, quanta, cutoff, seed } => {
            (common, Params::Locality { region, quanta, cutoff, seed })
        }
        Command::Infrared { common, lambda } => (common, Params::Infrared { lambda }),
        Command::Vacuum { common, region, cutoff } => (common, Params::Vacuum { region, cutoff }),
    }
}

fn emit(outcome: &Outcome, common: &Common) -> Result<(), CliError> {
    let text = match common.format {
        Format::Json => &outcome.json,
        Format::Csv => &outcome.csv,
    };
    match &common.out {
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
        }
    }
    Ok(())
}

fn execute(command: Command) -> Result<i32, CliError> {
    let (common, params) = split(command);
    let model = load_model(&common.model)?;
    let config = RunConfig::new(model, params, max_dim_from_env()?)?;
    let outcome = run(&config)?;
    emit(&outcome, &common)?;
    Ok(outcome.status.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

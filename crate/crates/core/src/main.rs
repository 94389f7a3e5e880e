use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use benford_tv::bounds::BoundMethod;
use benford_tv::cli::{self, CliError, CliResult, DensitySpec, Engine, OracleOptions};

#[derive(Parser)]
#[command(
    name = "benford-tv",
    version,
    about = "Distance of n·X mod 1 from uniform: exact values, bounds and oracles"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Exact distance and the two closed-form bounds for log_b U[1, b].
    Table {
        #[arg(long, default_value_t = cli::DEFAULT_BASE)]
        base: f64,
        /// Comma-separated powers.
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        #[arg(long, default_value_t = cli::DEFAULT_DIGITS)]
        digits: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// One upper bound for n·X mod 1.
    Bound {
        /// uniform LO HI | uniform-log b=B | exp-on-unit b=B | triangular LO PEAK HI | piecewise FILE
        #[arg(long)]
        density: DensitySpec,
        #[arg(long)]
        method: BoundMethod,
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
    /// Exact distance for log_b Y / a with Y uniform on [1, b].
    Exact {
        #[arg(long)]
        base: f64,
        #[arg(long)]
        exponent: f64,
    },
    /// Numerical distance for n·X mod 1.
    Oracle {
        #[arg(long)]
        density: DensitySpec,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "quad")]
        engine: Engine,
        #[arg(long, default_value_t = OracleOptions::default().samples)]
        samples: u64,
        #[arg(long, default_value_t = OracleOptions::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = OracleOptions::default().tol)]
        tol: f64,
    },
}

fn run(command: Command) -> CliResult<String> {
    match command {
        Command::Table {
            base,
            n,
            digits,
            format,
        } => {
            let ns = if n.is_empty() { cli::DEFAULT_NS.to_vec() } else { n };
            let rows = cli::table(base, &ns)?;
            match format {
                Format::Text => Ok(cli::render_text(&rows, digits)),
                Format::Csv => cli::render_csv(&rows),
                Format::Json => Ok(cli::render_json(base, &rows)),
            }
        }
        Command::Bound { density, method, n } => Ok(cli::render_bound(&cli::run_bound(&density, method, n)?)),
        Command::Exact { base, exponent } => cli::run_exact(base, exponent),
        Command::Oracle {
            density,
            n,
            engine,
            samples,
            seed,
            tol,
        } => {
            if n == 0 {
                return Err(CliError::Usage("n must be a positive integer".into()));
            }
            let opts = OracleOptions { samples, seed, tol };
            Ok(cli::render_oracle(&cli::run_oracle(&density, n, engine, opts)?))
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

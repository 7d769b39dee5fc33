use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use basket_expansion::cli::{cmd_price, cmd_sweep, cmd_table, CliError, RunConfig};
use basket_expansion::{McConfig, Sampler};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "basket-expansion",
    version,
    about = "Stochastic-expansion pricer for basket, Asian and dividend options"
)]
struct Args {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "BASKET_EXPANSION_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Pseudorandom,
    Sobol,
}

#[derive(Subcommand)]
enum Command {
    /// Price one instrument with every method listed in the config.
    Price {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV (defaults to the config's `output`, then stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a built-in table.
    Table {
        #[arg(long)]
        id: String,
        /// Monte Carlo paths for the reference column; 0 skips it.
        #[arg(long, default_value_t = 1_000_000)]
        paths: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SamplerArg::Sobol)]
        sampler: SamplerArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expansion errors against Monte Carlo over a strike grid, in bp.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open(path: Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(&p).map_err(|e| CliError::Failure(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(args: Args) -> Result<(), CliError> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    match args.command {
        Command::Price { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let mut w = open(out.or(cfg.output.clone()))?;
            cmd_price(&cfg, &mut w)?;
            w.flush()?;
        }
        Command::Table { id, paths, seed, sampler, out } => {
            let mc = McConfig {
                paths,
                seed,
                sampler: match sampler {
                    SamplerArg::Pseudorandom => Sampler::Pseudorandom,
                    SamplerArg::Sobol => Sampler::Sobol,
                },
                ..McConfig::default()
            };
            let mut w = open(out)?;
            cmd_table(&id, &mc, &mut w)?;
            w.flush()?;
        }
        Command::Sweep { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let mut w = open(out.or(cfg.output.clone()))?;
            cmd_sweep(&cfg, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("basket-expansion: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

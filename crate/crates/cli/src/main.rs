use clap::{Parser, Subcommand};
use ssd_cli::{experiment, profile, theory, validate, CliError, CliResult};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "ssd",
    version,
    about = "Stochastic subspace descent experiments: seeded replicate grids, percentile bands, performance profiles, and theory reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded experiment grid described by a JSON config
    Run {
        /// Path to the experiment config; output paths resolve relative
        /// to this file
        config: PathBuf,
    },
    /// Emit closed-form bound curves and the embedding-probability grid
    Theory {
        /// Path to the theory parameter JSON
        params: PathBuf,
    },
    /// Build Dolan-More performance profiles from finished traces
    Profile {
        /// Directory containing trace_*.csv files from `run`
        dir: PathBuf,
        /// Fraction of the initial error that must be shed to count as
        /// solved
        #[arg(long, default_value_t = 0.95)]
        threshold: f64,
        /// Extra deterministic baseline entries as NAME=FEVALS
        #[arg(long = "baseline", value_name = "NAME=FEVALS")]
        baselines: Vec<String>,
        /// Output CSV path (default: <dir>/profile.csv)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo validation of a direction sampler
    ValidateSampler {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        draws: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_baseline(raw: &str) -> CliResult<(String, u64)> {
    let (name, cost) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Input(format!("baseline `{raw}` is not NAME=FEVALS")))?;
    let cost: u64 = cost
        .parse()
        .map_err(|_| CliError::Input(format!("baseline cost `{cost}` is not an integer")))?;
    if name.is_empty() || cost == 0 {
        return Err(CliError::Input(format!(
            "baseline `{raw}` needs a name and a positive cost"
        )));
    }
    Ok((name.to_string(), cost))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config } => {
            let summary = experiment::run_experiment(&config)?;
            println!("wrote {}", summary.display());
        }
        Command::Theory { params } => {
            let (report, grid) = theory::run_theory(&params)?;
            println!("wrote {}", report.display());
            println!("wrote {}", grid.display());
        }
        Command::Profile {
            dir,
            threshold,
            baselines,
            output,
        } => {
            let baselines = baselines
                .iter()
                .map(|raw| parse_baseline(raw))
                .collect::<CliResult<Vec<_>>>()?;
            let out = profile::profile_dir(&dir, threshold, &baselines, output)?;
            println!("wrote {}", out.display());
        }
        Command::ValidateSampler {
            scheme,
            d,
            ell,
            eps,
            draws,
            seed,
        } => {
            let report = validate::validate_sampler(&scheme, d, ell, eps, draws, seed)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(CliError::input)?);
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

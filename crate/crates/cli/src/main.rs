//! Command-line driver. Every subcommand runs one reproducible experiment,
//! writes a JSON report embedding the full run configuration and tool
//! version, and exits 0 on success, 1 on usage or infrastructure errors, and
//! 2 when the experiment ran but its claim check failed.

mod run;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use qslab_core::dist::GridSpec;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qslab",
    version,
    about = "Numerical laboratory for the Quicksort limit law",
    after_help = "Seeds fully determine all randomness; identical configurations \
                  produce byte-identical reports."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Root seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Monte Carlo sample size (doubles as replication count where noted).
    #[arg(long, global = true, default_value_t = 100_000)]
    sample_size: usize,

    /// Iterations of the transformation when approximating the fixed point.
    #[arg(long, global = true, default_value_t = 25)]
    iterations: usize,

    /// Characteristic-function grid as t_min,t_max,points.
    #[arg(long, global = true, value_parser = parse_grid, default_value = "0.001,10,200")]
    grid: GridSpec,

    /// Where report files go; created if missing.
    #[arg(
        long,
        global = true,
        env = "QSLAB_OUTPUT_DIR",
        default_value = "qslab-out"
    )]
    output_dir: PathBuf,

    /// csv additionally writes plot-ready tables next to the JSON report.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum SourceArg {
    Cauchy,
    Exp,
    Pareto,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate the fixed point by iterating the map from the point mass
    /// at zero; writes the sample and its self-consistency residual.
    ApproxMu,
    /// Sort cost simulation: normalized comparison counts across runs.
    SimulateQuicksort {
        /// Number of keys per sorted array.
        #[arg(long, default_value_t = 10_000)]
        keys: u64,
    },
    /// Check that the approximation convolved with Cauchy(m, sigma) is
    /// fixed under the map.
    VerifyTheorem1 {
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        m: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
    },
    /// Residual of a sample under the map (reads a CSV sample, or builds a
    /// fresh approximation when no input is given).
    Residual {
        /// One value per line, `value` header optional.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Fail (exit 2) when the characteristic-function residual exceeds
        /// this.
        #[arg(long)]
        max_cf: Option<f64>,
    },
    /// Small-t analysis of a characteristic function: slope, solution
    /// constant, J, and the t^(2/3) envelope.
    AnalyzeCf {
        /// Sample CSV to analyze; defaults to a fresh approximation.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Weighted-sum attraction experiment toward the Cauchy family.
    Attraction {
        #[arg(long, value_enum, default_value_t = SourceArg::Cauchy)]
        source: SourceArg,
        #[arg(long, default_value_t = 12)]
        max_level: u32,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
    },
    /// Tail-bound grid for the maximal splitting weight.
    Chernoff {
        #[arg(long, value_delimiter = ',', default_values_t = vec![5, 10, 15, 20])]
        levels: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0])]
        xs: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
    },
    /// Coupled iteration: marginals must stay pinned while the coordinate
    /// difference contracts toward its Cauchy attractor.
    Coupling {
        #[arg(long, default_value_t = 8)]
        levels: u32,
    },
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected t_min,t_max,points".into());
    }
    let spec = GridSpec {
        t_min: parts[0].trim().parse().map_err(|e| format!("t_min: {e}"))?,
        t_max: parts[1].trim().parse().map_err(|e| format!("t_max: {e}"))?,
        points: parts[2]
            .trim()
            .parse()
            .map_err(|e| format!("points: {e}"))?,
    };
    spec.ts().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run::run(cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rksd::cli::{self, GridSpec};
use rksd::error::{Error, Result};
use rksd::io;
use rksd::RunConfig;

#[derive(Parser)]
#[command(
    name = "rksd",
    about = "Regularized kernel Sobolev discrepancy between sampled distributions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discrepancy between two sample CSVs, one JSON record per lambda.
    Discrepancy {
        /// Target samples (CSV, one point per row).
        #[arg(long)]
        p: PathBuf,
        /// Source samples (CSV, one point per row).
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Solve only at this lambda instead of the config grid. This is
        /// the explicit opt-in for lambda = 0.
        #[arg(long)]
        lambda: Option<f64>,
        /// Overrides the feature-map seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the witness u and its velocity field over a grid (d <= 2).
    WitnessGrid {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        lambda: f64,
        /// Per-axis lower bounds, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        grid_min: String,
        /// Per-axis upper bounds, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        grid_max: String,
        /// Per-axis point counts, comma separated.
        #[arg(long)]
        grid_points: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Top-k principal transport directions per lambda, as CSV.
    Directions {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in identity suite on synthetic data from the seed.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Multiplies every check tolerance; 0 forces failures.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact 1-D oracles on an (x, p, q) density CSV plus the W2 sandwich.
    #[command(name = "oracle-1d")]
    Oracle1d {
        #[arg(long)]
        input: PathBuf,
        /// Lower density bound; defaults to the tabulated minimum.
        #[arg(long)]
        a: Option<f64>,
        /// Upper density bound; defaults to the tabulated maximum.
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(
    path: &Option<PathBuf>,
    seed: Option<u64>,
    data_dim: Option<usize>,
) -> Result<RunConfig> {
    let mut config = match path {
        Some(p) => RunConfig::from_json_file(p)?,
        None => match data_dim {
            Some(d) => RunConfig::default_for_dim(d),
            None => RunConfig::default(),
        },
    };
    if let Some(seed) = seed {
        config.feature_map.seed = seed;
    }
    Ok(config)
}

/// Peeks at the sample file only to size the default feature map.
fn sniff_dim(path: &Path) -> Result<usize> {
    io::read_samples_csv(path, "probe").map(|s| s.dim())
}

fn resolve_out(flag: Option<PathBuf>, config: &RunConfig) -> Result<PathBuf> {
    flag.or_else(|| config.output_path.clone()).ok_or_else(|| {
        Error::InvalidParameter("no output path: pass --out or set output_path in the config".into())
    })
}

fn parse_float_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("bad number {s:?}: {e}")))
        })
        .collect()
}

fn parse_count_list(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidParameter(format!("bad count {s:?}: {e}")))
        })
        .collect()
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Discrepancy {
            p,
            q,
            config,
            lambda,
            seed,
            out,
        } => {
            let cfg = load_config(&config, seed, Some(sniff_dim(&p)?))?;
            let out = resolve_out(out, &cfg)?;
            cli::cmd_discrepancy(&cfg, &p, &q, lambda, &out)?;
            Ok(0)
        }
        Command::WitnessGrid {
            p,
            q,
            config,
            lambda,
            grid_min,
            grid_max,
            grid_points,
            seed,
            out,
        } => {
            let cfg = load_config(&config, seed, Some(sniff_dim(&p)?))?;
            let out = resolve_out(out, &cfg)?;
            let grid = GridSpec {
                min: parse_float_list(&grid_min)?,
                max: parse_float_list(&grid_max)?,
                points: parse_count_list(&grid_points)?,
            };
            cli::cmd_witness_grid(&cfg, &p, &q, lambda, &grid, &out)?;
            Ok(0)
        }
        Command::Directions {
            p,
            q,
            config,
            seed,
            out,
        } => {
            let cfg = load_config(&config, seed, Some(sniff_dim(&p)?))?;
            let out = resolve_out(out, &cfg)?;
            cli::cmd_directions(&cfg, &p, &q, &out)?;
            Ok(0)
        }
        Command::Validate {
            config,
            tolerance_scale,
            seed,
            out,
        } => {
            let cfg = load_config(&config, seed, None)?;
            let out = resolve_out(out, &cfg)?;
            let report = cli::cmd_validate(&cfg, tolerance_scale, &out)?;
            for check in &report.checks {
                let status = if check.passed { "PASS" } else { "FAIL" };
                println!(
                    "{status} {} observed={:e} tolerance={:e}",
                    check.name, check.observed, check.tolerance
                );
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Oracle1d { input, a, b, out } => {
            let bounds = match (a, b) {
                (Some(a), Some(b)) => Some((a, b)),
                (None, None) => None,
                _ => {
                    return Err(Error::InvalidParameter(
                        "pass both --a and --b, or neither".into(),
                    ))
                }
            };
            let cfg = RunConfig::default();
            let out = resolve_out(out, &cfg)?;
            let bc = cli::cmd_oracle_1d(&input, bounds, &out)?;
            println!(
                "s={:e} w2={:e} lower_ok={} upper_ok={}",
                bc.s, bc.w2, bc.lower_ok, bc.upper_ok
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

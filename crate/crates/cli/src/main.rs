use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use log::info;
use semibound_cli::commands::{self, Overrides};
use semibound_cli::config::parse_problem_file;
use semibound_cli::figures::{figure, FigureOptions};

/// Semiparametric bounds on expected payoffs.
///
/// Set RUST_LOG=info (or debug) for progress output.
#[derive(Debug, Parser)]
#[command(name = "semibound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file and print the bound as JSON.
    Bound {
        spec: PathBuf,
        /// Stopping tolerance on the largest reduced cost.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Right end of the atom search window.
        #[arg(long)]
        cap: Option<f64>,
    },
    /// Solve a problem file and write the extremal distribution as CSV.
    Export {
        spec: PathBuf,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        cap: Option<f64>,
    },
    /// Write the data series of a figure (fig1 .. fig9) as CSV files.
    Figure {
        id: String,
        /// Output directory.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Grid size for density series.
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha_lo: f64,
        #[arg(long)]
        alpha_hi: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        bisect_tol: f64,
        /// Comma-separated smoothing levels for fig8 and fig9.
        #[arg(long, value_delimiter = ',')]
        eta: Option<Vec<f64>>,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Bound { spec, epsilon, cap } => {
            let spec = Overrides { epsilon, cap }.apply(parse_problem_file(&spec)?)?;
            let report = commands::bound(&spec)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.converged)
        }
        Command::Export {
            spec,
            points,
            output,
            epsilon,
            cap,
        } => {
            let spec = Overrides { epsilon, cap }.apply(parse_problem_file(&spec)?)?;
            let (table, converged) = commands::export(&spec, points)?;
            table.write_file(&output)?;
            let status = serde_json::json!({
                "output": output.display().to_string(),
                "rows": table.rows.len(),
                "converged": converged,
            });
            println!("{status}");
            Ok(converged)
        }
        Command::Figure {
            id,
            output,
            epsilon,
            points,
            alpha_lo,
            alpha_hi,
            bisect_tol,
            eta,
        } => {
            let opts = FigureOptions {
                epsilon,
                points,
                alpha_lo,
                alpha_hi,
                bisect_tol,
                etas: eta,
            };
            let out = figure(&id, &opts)?;
            std::fs::create_dir_all(&output).with_context(|| format!("creating {}", output.display()))?;
            let mut files = Vec::new();
            for t in &out.tables {
                let path = output.join(format!("{}.csv", t.name));
                t.write_file(&path)?;
                info!("wrote {}", path.display());
                files.push(path.display().to_string());
            }
            println!("{}", serde_json::json!({ "files": files, "converged": out.converged }));
            Ok(out.converged)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: solver did not converge; results were written with converged:false");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

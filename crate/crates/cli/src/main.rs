use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use finslerc::{emit_report, run, Checks, CliError, PointSource, RunConfig};

#[derive(Parser)]
#[command(name = "finslerc", version, about = "Curvature and classification reports for Finsler metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse a metric at a set of points.
    Report {
        /// Metric JSON: {"dim": n, "metric": {"dsl": ...} | {"family": ..., "params": {...}}}.
        #[arg(long)]
        metric: PathBuf,
        /// Points JSON file, or random:seed=S,count=C[,box=B].
        #[arg(long)]
        points: String,
        /// Comma-separated subset of tensors,axioms,classify,theorems,oracle, or all.
        #[arg(long, default_value = "all")]
        checks: String,
        /// Classification tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value = "json")]
        format: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config(cmd: Command) -> Result<RunConfig, CliError> {
    let Command::Report {
        metric,
        points,
        checks,
        tol,
        format,
        out,
    } = cmd;
    let mut cfg = RunConfig::new(metric, PointSource::parse(&points)?);
    cfg.checks = Checks::parse(&checks)?;
    cfg.format = format.parse()?;
    cfg.out = out;
    if let Some(t) = tol {
        cfg = cfg.with_tol(t)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(cli.command).and_then(|cfg| {
        let report = run(&cfg)?;
        let text = emit_report(&report, cfg.format);
        match &cfg.out {
            Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?,
            None => print!("{text}"),
        }
        for bug in &report.engine_bugs {
            eprintln!("ENGINE BUG: {bug}");
        }
        Ok(report.exit_code())
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use vaporlight::harness::{fit_transparency_window, run_sweep, selftest, SweepConfig};
use vaporlight::Error;

/// Warm-vapor EIT simulator: figure sweeps, window fits and self-tests.
#[derive(Parser)]
#[command(name = "vaporlight", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a TOML config and write its CSV.
    Sweep {
        config: PathBuf,
        /// Output path; defaults to the config's `output`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Uniform resolution multiplier for convergence studies.
        #[arg(long)]
        grid_scale: Option<f64>,
    },
    /// Fit the transparency window to a slowing-sweep CSV.
    Fit { csv: PathBuf },
    /// Run the built-in quick checks.
    Selftest,
}

fn usage_or_failure(e: &Error) -> ExitCode {
    match e {
        Error::Usage(_) | Error::Parse(_) | Error::Io(_) | Error::Configuration(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Sweep { config, out, workers, grid_scale } => {
            let mut cfg = match SweepConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Some(s) = grid_scale {
                cfg.grid.scale *= s;
            }
            let outcome = match run_sweep(&cfg, workers) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return usage_or_failure(&e);
                }
            };
            let csv = outcome.to_csv();
            match out.or(cfg.output.clone()) {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &csv) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                    eprintln!("wrote {} rows to {}", outcome.rows.len(), path.display());
                }
                None => print!("{csv}"),
            }
            for (row, r) in outcome.rows.iter().enumerate() {
                if let Err(msg) = &r.outcome {
                    eprintln!("row {row} ({} = {}): {msg}", outcome.parameter, r.value);
                }
            }
            if let Some(spot) = &outcome.spot_check {
                for p in &spot.problems {
                    eprintln!("spot check, row {}: {p}", spot.index);
                }
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Command::Fit { csv } => {
            let text = match std::fs::read_to_string(&csv) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {}: {e}", csv.display());
                    return ExitCode::from(1);
                }
            };
            match fit_transparency_window(&text) {
                Ok(fit) => {
                    println!("window_hz = {:.8e}", fit.window_hz);
                    println!("residual = {:.8e}", fit.residual);
                    println!("iterations = {}", fit.iterations);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    usage_or_failure(&e)
                }
            }
        }
        Command::Selftest => {
            let checks = selftest();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) { ExitCode::SUCCESS } else { ExitCode::from(2) }
        }
    }
}

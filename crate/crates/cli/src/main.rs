use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hyperflow_cli::certify::certify;
use hyperflow_cli::experiment::{combined_exit_code, EXIT_CONFIG};
use hyperflow_cli::{parse_config, CliError, ExperimentConfig, PointResult};

#[derive(Parser)]
#[command(name = "hyperflow", version, about = "Inverse curvature flow of convex graphs in hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment.
    Run { config: PathBuf },
    /// Run every (p, a) grid point of the config in parallel.
    Sweep { config: PathBuf },
    /// Continue a run from a snapshot.
    Restart { snapshot: PathBuf, config: PathBuf },
    /// Check the algebraic properties of F_a.
    Certify { n: usize, a: f64 },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(parse_config(&text)?)
}

fn summarize(results: &[PointResult]) {
    for r in results {
        let lambda = r
            .rate(hyperflow_core::diagnostics::Quantity::VMaxMinus1)
            .map_or("n/a".to_string(), |f| format!("{:.5}", f.lambda_hat));
        let status = match &r.output.abort {
            Some(e) => format!("aborted: {e}"),
            None if r.output.healthy() => "healthy".to_string(),
            None => "barrier violated".to_string(),
        };
        println!(
            "p = {} a = {}: t = {} lambda(v-1) = {} {} [{:.1}s] -> {}",
            r.p,
            r.a,
            r.output.final_state.t,
            lambda,
            status,
            r.runtime_seconds,
            r.dir.display()
        );
    }
}

fn execute(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Run { config } => {
            let res = hyperflow_cli::run_experiment(&load(&config)?)?;
            summarize(std::slice::from_ref(&res));
            Ok(res.exit_code)
        }
        Command::Sweep { config } => {
            let results = hyperflow_cli::sweep(&load(&config)?)?;
            summarize(&results);
            Ok(combined_exit_code(&results))
        }
        Command::Restart { snapshot, config } => {
            let res = hyperflow_cli::restart(&snapshot, &load(&config)?)?;
            summarize(std::slice::from_ref(&res));
            Ok(res.exit_code)
        }
        Command::Certify { n, a } => match certify(n, a) {
            Ok(c) => {
                print!("{}", c.report());
                Ok(if c.passed() { 0 } else { 1 })
            }
            Err(e) => {
                eprintln!("error: {e}");
                Ok(EXIT_CONFIG)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = execute(cli.command).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}

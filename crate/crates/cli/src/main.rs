use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdheat::acceptance;
use sdheat::run;
use sdheat::{CliError, Report, Result, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "sdheat", version, about = "Sampled-data time and norm optimal control of the 1-D heat equation")]
struct Cli {
    /// TOML run configuration; defaults describe the reference instance.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report.json and rows.csv; overrides output.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimal-norm controls at fixed horizons.
    SolveNorm,
    /// Minimal times for fixed budgets.
    SolveTime,
    /// Sampling-period error study.
    Sweep,
    /// Runs the acceptance suite.
    Verify,
    /// Re-renders a JSON report as text.
    Report {
        json: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out {
        cfg.output.dir = Some(dir.clone());
    }
    Ok(cfg)
}

fn emit(report: &Report) -> Result<()> {
    print!("{}", report.render_text());
    if let Some(dir) = &report.meta.config.output.dir {
        for path in report.write_to(dir)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    if let Command::Report { json } = &cli.command {
        let text = std::fs::read_to_string(json).map_err(|source| CliError::Read {
            path: json.clone(),
            source,
        })?;
        print!("{}", Report::from_json(&text)?.render_text());
        return Ok(());
    }
    let cfg = load_config(cli)?;
    let report = match cli.command {
        Command::SolveNorm => run::run_solve_norm(&cfg)?,
        Command::SolveTime => run::run_solve_time(&cfg)?,
        Command::Sweep => run::run_error_lab(&cfg, cli.threads)?,
        Command::Verify => {
            let outcomes = acceptance::run_all(&cfg, cli.threads, |o| println!("{}", o.line()))?;
            let report = acceptance::to_report(&cfg, &outcomes);
            if let Some(dir) = &cfg.output.dir {
                report.write_to(dir)?;
            }
            for o in outcomes.iter().filter(|o| !o.pass()) {
                for v in o.verdicts.iter().filter(|v| !v.pass) {
                    println!("  criterion {} failed: {} (measured {:e}, bound {:e})", o.id, v.name, v.measured, v.bound);
                }
            }
            let failed = outcomes.iter().filter(|o| !o.pass()).count();
            if failed > 0 {
                return Err(CliError::VerificationFailed { failed });
            }
            return Ok(());
        }
        Command::Report { .. } => unreachable!("handled above"),
    };
    emit(&report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

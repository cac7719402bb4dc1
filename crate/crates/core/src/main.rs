use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use landau_dos::cli::commands::write_error_record;
use landau_dos::cli::{cmd_bounds, cmd_gamma, cmd_report, cmd_simulate, ExperimentConfig, RunContext};
use landau_dos::Error;

/// Restricted density of states of a disordered Landau level.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic upper bounds and reference densities on the energy grid.
    Bounds(RunArgs),
    /// Monte Carlo histogram of the truncated random matrix.
    Simulate(RunArgs),
    /// Variational decay energy against its closed form.
    Gamma(RunArgs),
    /// Join histogram and bounds of one run into a comparison report.
    Report(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `outputs.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the Monte Carlo; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(args: &RunArgs, command: &Command) -> Result<(), Error> {
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let config = ExperimentConfig::load(&args.config)?;
    let ctx = RunContext::new(config, args.out.clone(), args.seed)?;
    let dir = ctx.out_dir().display().to_string();
    match command {
        Command::Bounds(_) => {
            let s = cmd_bounds(&ctx)?;
            eprintln!("bounds: {} curves, {} skipped -> {dir}", s.bounds.len(), s.skipped.len());
        }
        Command::Simulate(_) => {
            let m = cmd_simulate(&ctx)?;
            eprintln!(
                "simulate: {} realizations of n = {}, second moment {:.6e} -> {dir}",
                m.histogram.realizations, m.histogram.n, m.moments.second
            );
        }
        Command::Gamma(_) => {
            let g = cmd_gamma(&ctx)?;
            eprintln!("gamma: {:.12e} after {} iterations -> {dir}", g.variational, g.iterations);
        }
        Command::Report(_) => {
            let r = cmd_report(&ctx)?;
            for d in &r.domination {
                eprintln!("{}: {}", d.bound, if d.pass { "PASS" } else { "FAIL" });
            }
        }
    }
    eprintln!("run_id={}", ctx.run_id);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Bounds(a) | Command::Simulate(a) | Command::Gamma(a) | Command::Report(a) => a,
    };
    match run(args, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            // fall back to the configured directory when no --out was given
            let dir = args.out.clone().or_else(|| {
                ExperimentConfig::load(&args.config).ok().map(|c| c.outputs.dir)
            });
            if let Some(dir) = dir {
                write_error_record(&dir, &e);
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dotbus::model::Tier;
use dotbus_cli::commands::{self, Outcome, RunContext};
use dotbus_cli::{exit, exit_code, ExperimentConfig};

#[derive(Parser)]
#[command(name = "dotbus", version, about = "Quantum dots on a shared waveguide: gates, graph states, decay studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `outputs.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Model tier; overrides `tier`.
    #[arg(long, global = true)]
    tier: Option<Tier>,
    /// Write SVG figures next to the CSV files.
    #[arg(long, global = true)]
    plot: bool,
    /// Seed for randomized inputs; overrides `rng_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the regime conditions for every dot.
    Validate,
    /// Two-dot controlled-phase gate truth table.
    Cz,
    /// Cross-group residual phases.
    NullGate,
    /// Graph state from the `graph` block.
    Graph,
    /// N-controlled phase recipe report.
    Ncz,
    /// Cluster state on the `lattice` block.
    Cluster,
    /// CZ fidelity versus waveguide decay.
    DecaySweep,
    /// Fidelity versus register size and lattice shape.
    Scaling,
    /// Fock-cutoff convergence of the decay engine.
    FockCheck,
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let path = cli.config.as_ref().ok_or_else(|| anyhow::anyhow!("--config PATH is required"))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(t) = cli.tier {
        cfg.tier = t;
    }
    if let Some(s) = cli.seed {
        cfg.rng_seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.outputs.dir = o.clone();
    }
    let ctx = RunContext::new(cfg, None, cli.plot)?;
    match cli.command {
        Command::Validate => commands::cmd_validate(&ctx),
        Command::Cz => commands::cmd_cz(&ctx),
        Command::NullGate => commands::cmd_null_gate(&ctx),
        Command::Graph => commands::cmd_graph(&ctx),
        Command::Ncz => commands::cmd_ncz(&ctx),
        Command::Cluster => commands::cmd_cluster(&ctx),
        Command::DecaySweep => commands::cmd_decay_sweep(&ctx),
        Command::Scaling => commands::cmd_scaling(&ctx),
        Command::FockCheck => commands::cmd_fock_check(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(&cli) {
        Ok(Outcome::Ok) => exit::OK,
        Ok(Outcome::RegimeFailure) => exit::REGIME,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use switchlearn::experiment::rate_window;
use switchlearn::{compare_baseline, export, run_experiment, validate, ExperimentConfig, Result};
use switchlearn_core::identifiability_report;

#[derive(Parser)]
#[command(
    name = "switchlearn",
    version,
    about = "Simulate social learning with switching communication"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the switching protocol and write beliefs.csv, comm.csv, summary.txt.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Write every k-th stored snapshot to beliefs.csv (the last is always kept).
        #[arg(long, default_value_t = 1)]
        thin: usize,
    },
    /// Run the switching protocol and the tau = 1 baseline on the same signals.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicas: Option<usize>,
        /// Agent whose paired trajectories go to paired.csv.
        #[arg(long)]
        agent: Option<usize>,
        #[arg(long, default_value_t = 1)]
        thin: usize,
    },
    /// Print the identifiability report (KL tables, divergences, rate).
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Also write kl.csv, network_divergence.csv and equivalence.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the config and the standing assumptions only.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path, seed: Option<u64>, replicas: Option<usize>, agent: Option<usize>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = replicas {
        cfg.replicas = r;
    }
    if let Some(a) = agent {
        cfg.designated_agent = a;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            replicas,
            out,
            thin,
        } => {
            let cfg = load(&config, seed, replicas, None)?;
            let report = run_experiment(&cfg)?;
            export::write_run(&report, &out, thin)?;
            println!(
                "{} of {} replicas learned; mean communication fraction {:.4}; outputs in {}",
                report.learned_count(),
                report.replicas.len(),
                report.mean_fraction(),
                out.display()
            );
        }
        Command::Compare {
            config,
            out,
            seed,
            replicas,
            agent,
            thin,
        } => {
            let cfg = load(&config, seed, replicas, agent)?;
            let cmp = compare_baseline(&cfg)?;
            export::write_comparison(&cmp, &out, thin)?;
            println!(
                "communication fraction: switching {:.4}, baseline {:.4}; outputs in {}",
                cmp.switching.mean_fraction(),
                cmp.baseline.mean_fraction(),
                out.display()
            );
        }
        Command::Analyze { config, out } => {
            let cfg = load(&config, None, None, None)?;
            let scenario = cfg.scenario()?;
            let report = identifiability_report(&scenario.likelihood, &scenario.space);
            let labels = scenario.space.labels().to_vec();
            print!("{}", export::format_identifiability(&report, &labels, cfg.true_state));
            let (a, b) = rate_window(cfg.rounds);
            println!("\nrate estimation window: rounds {a}..{b}");
            if let Some(dir) = out {
                export::write_identifiability(&report, &labels, &dir)?;
            }
        }
        Command::Validate { config } => {
            let cfg = load(&config, None, None, None)?;
            let scenario = cfg.scenario()?;
            let report = validate(&scenario)?;
            println!("config ok: {} agents, {} states", cfg.agents, cfg.states);
            println!("A1 bounded log-likelihoods: bound {}", report.log_bound);
            println!("A2 global identifiability: holds");
            println!("A3 strong connectivity: holds");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

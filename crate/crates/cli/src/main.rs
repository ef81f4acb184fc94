use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oscitrack_cli::{cmd_check, cmd_simulate, cmd_sweep, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "oscitrack", version, about = "Oscillatory trajectory tracking for affine connection control systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify trackability; exit 0 certified, 2 violated, 3 undecided.
    Check(Common),
    /// Synthesize a law, integrate the closed loop and report the tracking error.
    Simulate(Common),
    /// Rerun the simulation for each epsilon of `[sweep].eps_list`.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn load(&self) -> anyhow::Result<(ExperimentConfig, RunOptions)> {
        let cfg = ExperimentConfig::load(&self.config)?;
        let opts = RunOptions { out: self.out.clone(), seed: self.seed, jobs: self.jobs };
        Ok((cfg, opts))
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Check(c) => {
            let (cfg, opts) = c.load()?;
            let r = cmd_check(&cfg, &opts)?;
            println!("{}: {}", r.status, r.headline);
            Ok(r.exit_code as u8)
        }
        Command::Simulate(c) => {
            let (cfg, opts) = c.load()?;
            let s = cmd_simulate(&cfg, &opts)?;
            println!(
                "{} level {} eps {:.6e}: sup error {:.6} over [{}] in {:.2} s",
                s.mode,
                s.level,
                s.epsilon,
                s.sup_error,
                s.metric.join(", "),
                s.runtime_s
            );
            Ok(0)
        }
        Command::Sweep(c) => {
            let (cfg, opts) = c.load()?;
            for r in cmd_sweep(&cfg, &opts)? {
                match r.order {
                    Some(o) => println!("eps {:.6e}  error {:.6e}  order {o:.3}", r.epsilon, r.error),
                    None => println!("eps {:.6e}  error {:.6e}", r.epsilon, r.error),
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gpf::config::ExperimentConfig;
use gpf::experiment;
use gpf::Result;

#[derive(Parser)]
#[command(name = "gpf", version, about = "Parametrically driven binary condensates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the stationary state and report it against Thomas-Fermi.
    Groundstate(Common),
    /// Run (or resume) a driven evolution.
    Evolve(Common),
    /// Derive tables from a completed run directory.
    Analyze(Common),
    /// One evolution per drive frequency in `sweep.frequencies_hz`.
    Sweep(Common),
    /// Bogoliubov curves and resonant wavenumbers.
    Dispersion(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    preset: Option<String>,
    /// Run directory; defaults to runs/<name>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use the full three-dimensional grid.
    #[arg(long)]
    full_3d: bool,
}

impl Common {
    fn resolve(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = ExperimentConfig::load(Some(&self.config), self.preset.as_deref())?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.full_3d {
            cfg = cfg.into_full_3d()?;
        }
        let out = self.out.clone().unwrap_or_else(|| cfg.output_dir());
        Ok((cfg, out))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Groundstate(c) => {
            let (cfg, out) = c.resolve()?;
            let r = experiment::cmd_groundstate(&cfg, &out)?;
            println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
        }
        Command::Evolve(c) => {
            let (cfg, out) = c.resolve()?;
            let s = experiment::cmd_evolve(&cfg, &out)?;
            println!("{}", serde_json::to_string_pretty(&s).expect("summary serializes"));
        }
        Command::Analyze(c) => {
            let (cfg, out) = c.resolve()?;
            let s = experiment::cmd_analyze(&cfg, &out)?;
            println!("{}", serde_json::to_string_pretty(&s).expect("summary serializes"));
        }
        Command::Sweep(c) => {
            let (cfg, out) = c.resolve()?;
            print!("{}", experiment::cmd_sweep(&cfg, &out)?.to_text());
        }
        Command::Dispersion(c) => {
            let (cfg, out) = c.resolve()?;
            let t = experiment::cmd_dispersion(&cfg, &out)?;
            print!("{}", t.resonances.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

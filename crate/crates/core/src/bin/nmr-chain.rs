use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nmr_chain::experiments::{self, load_config, CommandError, RunConfig};
use nmr_chain::integrator::NORM_TOLERANCE;

#[derive(Parser)]
#[command(name = "nmr-chain", version, about = "Driven Ising spin-chain simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print eigenenergies and single-flip transition frequencies.
    Resonances(Common),
    /// Run the pulse sequence and write time series plus a summary.
    Evolve(Common),
    /// Fidelity against the entangled target over a grid of J'/J.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `chain.j2=0.3` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the sweep.
    #[arg(long, default_value_t = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))]
    jobs: usize,
    /// Treat a norm drift above 1e-6 as a hard failure.
    #[arg(long)]
    strict_norm: bool,
    /// Phase of the second pulse, radians.
    #[arg(long, allow_hyphen_values = true)]
    phase: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CommandError> {
        let mut overrides = self.set.clone();
        if let Some(phase) = self.phase {
            overrides.push(format!("pulse.1.phase={phase:?}"));
        }
        Ok(load_config(self.config.as_deref(), &overrides)?)
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn warn_norm(max_norm_error: f64) {
    if max_norm_error > NORM_TOLERANCE {
        eprintln!(
            "warning: norm drifted by {max_norm_error:e} (tolerance {NORM_TOLERANCE:e}); rerun with a finer step"
        );
    }
}

fn run(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::Resonances(c) => {
            let config = c.load()?;
            print!("{}", experiments::cmd_resonances(&config, c.out.as_deref())?);
        }
        Command::Evolve(c) => {
            let config = c.load()?;
            let out = c.out_dir();
            let report = experiments::cmd_evolve(&config, &out, c.strict_norm)?;
            warn_norm(report.trajectory.max_norm_error);
            let f = report.fidelity_minus;
            println!(
                "t = {} us, steps = {}, |F| = {:.6} (re {:.6}, im {:.6}), max norm error = {:e}",
                report.trajectory.end_time(),
                report.trajectory.steps,
                f.modulus,
                f.value.re,
                f.value.im,
                report.trajectory.max_norm_error
            );
            println!("wrote {}", out.display());
        }
        Command::Sweep(c) => {
            let config = c.load()?;
            let out = c.out_dir();
            let rows = experiments::cmd_sweep(&config, &out, c.jobs, c.strict_norm)?;
            let worst = rows.iter().map(|r| r.max_norm_error).fold(0.0, f64::max);
            warn_norm(worst);
            println!("j2/j1      |F|");
            for r in &rows {
                println!("{:<10} {:.6}", experiments::format_number(r.ratio), r.fidelity.modulus);
            }
            println!("wrote {}", out.join("sweep.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

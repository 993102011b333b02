//! Scenario runners behind the command-line interface: the resonance table,
//! the two-pulse evolution with its time-series files, and the J′/J sweep.

pub mod config;
mod output;

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{eigenenergies, single_flip_transitions, BasisIndex};
use crate::drive::to_schrodinger;
use crate::error::Error;
use crate::integrator::{run_sequence, Trajectory, NORM_TOLERANCE};
use crate::observables::{bell_partner, bell_target, fidelity, relative_phase, FidelityResult};
use crate::state::{Picture, StateVector};

pub use config::{load_config, ConfigError, Resolved, RunConfig, SweepSpec};
pub use output::format_number;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Simulation(#[from] Error),
    #[error("output error: {0}")]
    Io(String),
}

impl CommandError {
    /// 1 for configuration and I/O problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Simulation(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Io(e.to_string())
    }
}

/// One row of the transition table.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRow {
    pub from: BasisIndex,
    pub to: BasisIndex,
    pub spin: usize,
    /// 2π·MHz.
    pub frequency: f64,
    /// Index of the configured pulse driving this transition symbolically.
    pub pulse: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceTable {
    pub n_spins: usize,
    /// `E/ħ` in 2π·MHz, by basis state.
    pub energies: Vec<f64>,
    pub transitions: Vec<TransitionRow>,
}

impl ResonanceTable {
    /// Distinct transition frequencies, sorted, merged within `tol`.
    pub fn distinct_frequencies(&self, tol: f64) -> Vec<f64> {
        let mut f: Vec<f64> = self.transitions.iter().map(|t| t.frequency).collect();
        f.sort_by(|a, b| a.total_cmp(b));
        f.dedup_by(|a, b| (*a - *b).abs() <= tol);
        f
    }

    pub fn flagged(&self, pulse: usize) -> Option<&TransitionRow> {
        self.transitions.iter().find(|t| t.pulse == Some(pulse))
    }

    pub fn render(&self) -> String {
        let n = self.n_spins;
        let mut s = String::new();
        let _ = writeln!(s, "Eigenenergies E/h [2pi MHz]");
        for (x, e) in self.energies.iter().enumerate() {
            let label = BasisIndex::new(x, n).expect("in range").label(n);
            let _ = writeln!(s, "  {x:>3} {label}: {}", format_number(*e));
        }
        let _ = writeln!(s, "Single-flip transitions [2pi MHz]");
        for t in &self.transitions {
            let flag = t.pulse.map(|p| format!("  <- pulse-{} carrier", p + 1)).unwrap_or_default();
            let _ = writeln!(
                s,
                "  {}→{}: {} (spin {}){flag}",
                t.from.label(n),
                t.to.label(n),
                format_number(t.frequency),
                t.spin
            );
        }
        s
    }
}

/// Energies and single-flip transitions of the configured chain, with the
/// protocol transitions flagged.
pub fn resonance_table(config: &RunConfig) -> Result<ResonanceTable, CommandError> {
    let params = config.chain_params()?;
    let energies = eigenenergies(&params).into_iter().map(|e| e / TAU).collect();
    let transitions = single_flip_transitions(&params)
        .into_iter()
        .map(|t| {
            let pulse = config.pulse.iter().position(|p| {
                let from = p.from.unwrap_or(usize::MAX);
                p.carrier.is_none()
                    && p.spin == Some(t.spin)
                    && (from == t.from.value() || from == t.to.value())
            });
            TransitionRow {
                from: t.from,
                to: t.to,
                spin: t.spin,
                frequency: t.frequency / TAU,
                pulse,
            }
        })
        .collect();
    Ok(ResonanceTable {
        n_spins: params.n_spins(),
        energies,
        transitions,
    })
}

/// Prints the table and, when `out` is given, writes `resonances.csv` there.
pub fn cmd_resonances(config: &RunConfig, out: Option<&Path>) -> Result<String, CommandError> {
    let table = resonance_table(config)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        output::write_resonances(dir, config, &table)?;
    }
    Ok(table.render())
}

/// Result of one two-pulse run.
#[derive(Debug, Clone)]
pub struct EvolveReport {
    pub resolved: Resolved,
    pub trajectory: Trajectory,
    /// Against `bell_target(−1)`.
    pub fidelity_minus: FidelityResult,
    /// Against `bell_target(+1)`.
    pub fidelity_plus: FidelityResult,
    pub relative_phase: f64,
    pub wall_seconds: f64,
}

impl EvolveReport {
    pub fn final_state(&self) -> StateVector {
        self.trajectory.final_state()
    }

    pub fn norm_ok(&self) -> bool {
        self.trajectory.max_norm_error <= NORM_TOLERANCE
    }
}

/// Runs the configured sequence from the ground state.
pub fn simulate(config: &RunConfig, strict_norm: bool) -> Result<EvolveReport, CommandError> {
    let mut resolved = config.resolve()?;
    resolved.policy.strict_norm = strict_norm;
    let start = Instant::now();
    let ground = resolved.params.basis(0)?;
    let trajectory = run_sequence(
        &resolved.params,
        ground,
        &resolved.pulses,
        &resolved.policy,
        config.output.stride,
    )?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let d = trajectory.final_state();
    let n = resolved.params.n_spins();
    let fidelity_minus = fidelity(&bell_target(n, -1.0), &unit(&d))?;
    let fidelity_plus = fidelity(&bell_target(n, 1.0), &unit(&d))?;
    Ok(EvolveReport {
        relative_phase: relative_phase(&d),
        resolved,
        trajectory,
        fidelity_minus,
        fidelity_plus,
        wall_seconds,
    })
}

/// Renormalizes a state that drifted inside the non-strict tolerance so the
/// fidelity precondition holds; a no-op for states within 1e-6.
fn unit(d: &StateVector) -> StateVector {
    let n = d.norm_sqr();
    if (n - 1.0).abs() <= 1e-6 {
        return d.clone();
    }
    let s = n.sqrt();
    StateVector::new(d.amplitudes().iter().map(|a| a / s).collect(), Picture::Interaction)
        .expect("same dimension")
}

/// Runs the sequence and writes the time-series files and summary into `out`.
pub fn cmd_evolve(config: &RunConfig, out: &Path, strict_norm: bool) -> Result<EvolveReport, CommandError> {
    let report = simulate(config, strict_norm)?;
    std::fs::create_dir_all(out)?;
    output::write_evolve(out, config, &report)?;
    Ok(report)
}

/// Schrödinger-picture amplitudes of a trajectory sample.
pub fn schrodinger_state(resolved: &Resolved, t: f64, d: &[num_complex::Complex64]) -> StateVector {
    let d = StateVector::new(d.to_vec(), Picture::Interaction).expect("power-of-two dimension");
    to_schrodinger(&d, t, &resolved.params).expect("matching dimension")
}

/// One point of the J′/J sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ratio: f64,
    /// J′ in 2π·MHz.
    pub j2: f64,
    pub fidelity: FidelityResult,
    pub max_norm_error: f64,
}

fn sweep_point(config: &RunConfig, ratio: f64, strict_norm: bool) -> Result<SweepRow, CommandError> {
    let mut point = config.clone();
    point.chain.j2 = ratio * config.chain.j1;
    point.output.stride = usize::MAX;
    let mut resolved = point.resolve()?;
    resolved.policy.strict_norm = strict_norm;
    let ground = resolved.params.basis(0)?;
    let traj = run_sequence(&resolved.params, ground, &resolved.pulses, &resolved.policy, usize::MAX)?;
    let target = bell_target(resolved.params.n_spins(), config.sweep.target_sign);
    let fid = fidelity(&target, &unit(&traj.final_state()))?;
    Ok(SweepRow {
        ratio,
        j2: point.chain.j2,
        fidelity: fid,
        max_norm_error: traj.max_norm_error,
    })
}

/// Fidelity at every grid point, in grid order, computed on `jobs` workers.
pub fn run_sweep(config: &RunConfig, jobs: usize, strict_norm: bool) -> Result<Vec<SweepRow>, CommandError> {
    let grid = config.sweep.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CommandError::Io(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        grid.par_iter()
            .map(|&r| sweep_point(config, r, strict_norm))
            .collect()
    })
}

/// Runs the sweep and writes `sweep.csv` into `out`.
pub fn cmd_sweep(
    config: &RunConfig,
    out: &Path,
    jobs: usize,
    strict_norm: bool,
) -> Result<Vec<SweepRow>, CommandError> {
    let rows = run_sweep(config, jobs, strict_norm)?;
    std::fs::create_dir_all(out)?;
    output::write_sweep(out, config, &rows)?;
    Ok(rows)
}

/// Index of the entangled partner state for the configured chain.
pub fn partner_index(config: &RunConfig) -> usize {
    bell_partner(config.chain.larmor.len())
}

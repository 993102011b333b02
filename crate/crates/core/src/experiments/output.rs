//! File writers. Every file starts with the resolved configuration as `#`
//! comment lines, followed by a single header row.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::RunConfig;
use super::{partner_index, schrodinger_state, EvolveReport, ResonanceTable, SweepRow};
use crate::observables::{populations, spin_expectations};

/// Compact decimal rendering: at most nine decimals, trailing zeros removed.
pub fn format_number(v: f64) -> String {
    let s = format!("{v:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn provenance(config: &RunConfig) -> String {
    let mut s = String::from("# resolved configuration (frequencies in 2pi*MHz)\n");
    for line in config.to_toml().lines() {
        let _ = writeln!(s, "# {line}");
    }
    s
}

fn resolved_carriers(report: &EvolveReport) -> String {
    let mut s = String::new();
    for (i, p) in report.resolved.pulses.iter().enumerate() {
        let _ = writeln!(
            s,
            "# pulse {}: carrier = {} (2pi*MHz), phase = {} rad, angle = {} rad, duration = {} us",
            i + 1,
            p.carrier() / TAU,
            p.phase(),
            p.angle(),
            p.duration(&report.resolved.params).expect("validated pulse"),
        );
    }
    s
}

fn row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let cells: Vec<String> = values.into_iter().map(|v| v.to_string()).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub(super) fn write_resonances(dir: &Path, config: &RunConfig, table: &ResonanceTable) -> std::io::Result<()> {
    let mut s = provenance(config);
    s.push_str("kind,from,to,spin,value_2pi_mhz,flag\n");
    for (x, e) in table.energies.iter().enumerate() {
        let _ = writeln!(s, "energy,{x},{x},,{},", format_number(*e));
    }
    for t in &table.transitions {
        let flag = t.pulse.map(|p| format!("pulse-{}", p + 1)).unwrap_or_default();
        let _ = writeln!(
            s,
            "transition,{},{},{},{},{flag}",
            t.from.value(),
            t.to.value(),
            t.spin,
            format_number(t.frequency)
        );
    }
    fs::write(dir.join("resonances.csv"), s)
}

pub(super) fn write_evolve(dir: &Path, config: &RunConfig, report: &EvolveReport) -> std::io::Result<()> {
    let head = format!("{}{}", provenance(config), resolved_carriers(report));
    let traj = &report.trajectory;
    let n = report.resolved.params.n_spins();
    let dim = report.resolved.params.dim();
    let partner = partner_index(config);

    let mut amps = head.clone();
    let _ = writeln!(amps, "t_us,re_d0,im_d0,re_d{partner},im_d{partner}");
    let mut pops = head.clone();
    let cols: Vec<String> = (0..dim).map(|k| format!("p{k}")).collect();
    let _ = writeln!(pops, "t_us,{},norm_error", cols.join(","));
    let mut iz = head.clone();
    let cols: Vec<String> = (0..n).map(|q| format!("iz{q}")).collect();
    let _ = writeln!(iz, "t_us,{}", cols.join(","));
    let mut ixy = head.clone();
    ixy.push_str("# transverse components from Schrodinger-picture amplitudes\n");
    let cols: Vec<String> = (0..n).map(|q| format!("ix{q},iy{q}")).collect();
    let _ = writeln!(ixy, "t_us,{}", cols.join(","));

    for sample in &traj.samples {
        let d = &sample.state;
        row(&mut amps, [sample.t, d[0].re, d[0].im, d[partner].re, d[partner].im]);
        let c = schrodinger_state(&report.resolved, sample.t, d);
        let p = populations(&c);
        row(&mut pops, std::iter::once(sample.t).chain(p).chain([sample.norm_error]));
        let e = spin_expectations(&c);
        row(&mut iz, std::iter::once(sample.t).chain(e.iz.iter().copied()));
        row(
            &mut ixy,
            std::iter::once(sample.t).chain(e.ix.iter().zip(&e.iy).flat_map(|(x, y)| [*x, *y])),
        );
    }
    fs::write(dir.join("amplitudes.csv"), amps)?;
    fs::write(dir.join("populations.csv"), pops)?;
    fs::write(dir.join("spin_z.csv"), iz)?;
    fs::write(dir.join("spin_xy.csv"), ixy)?;

    let last = traj.final_sample();
    let fin = schrodinger_state(&report.resolved, last.t, &last.state);
    let e = spin_expectations(&fin);
    let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
    let mut summary = head;
    let _ = writeln!(summary, "[result]");
    let _ = writeln!(summary, "end_time_us = {}", last.t);
    let _ = writeln!(summary, "steps = {}", traj.steps);
    let _ = writeln!(summary, "samples = {}", traj.samples.len());
    let _ = writeln!(summary, "max_norm_error = {:e}", traj.max_norm_error);
    let _ = writeln!(summary, "norm_within_tolerance = {}", report.norm_ok());
    if let Some(delta) = traj.convergence_delta {
        let _ = writeln!(summary, "convergence_delta = {delta:e}");
    }
    let _ = writeln!(summary, "relative_phase_rad = {}", report.relative_phase);
    let _ = writeln!(summary, "final_populations = [{}]", list(&populations(&fin)));
    let _ = writeln!(summary, "iz = [{}]", list(&e.iz));
    let _ = writeln!(summary, "pulse_boundaries_us = [{}]", list(&traj.pulse_boundaries));
    for (name, f) in [("fidelity_minus", &report.fidelity_minus), ("fidelity_plus", &report.fidelity_plus)] {
        let _ = writeln!(summary, "\n[{name}]");
        let _ = writeln!(summary, "re = {}", f.value.re);
        let _ = writeln!(summary, "im = {}", f.value.im);
        let _ = writeln!(summary, "modulus = {}", f.modulus);
    }
    fs::write(dir.join("summary.toml"), summary)?;
    fs::write(
        dir.join("timing.toml"),
        format!("wall_seconds = {}\nsteps = {}\n", report.wall_seconds, traj.steps),
    )
}

pub(super) fn write_sweep(dir: &Path, config: &RunConfig, rows: &[SweepRow]) -> std::io::Result<()> {
    let mut s = provenance(config);
    s.push_str("j2_over_j1,j2_2pi_mhz,re_f,im_f,abs_f,max_norm_error\n");
    for r in rows {
        row(
            &mut s,
            [r.ratio, r.j2, r.fidelity.value.re, r.fidelity.value.im, r.fidelity.modulus, r.max_norm_error],
        );
    }
    fs::write(dir.join("sweep.csv"), s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(105.19999999999999), "105.2");
        assert_eq!(format_number(400.0), "400");
        assert_eq!(format_number(-355.1), "-355.1");
        assert_eq!(format_number(-1e-12), "0");
    }
}

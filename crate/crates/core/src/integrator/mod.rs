//! Fixed-step RK4 integration of the interaction-picture amplitudes over a
//! pulse sequence, plus an independent propagator oracle in [`oracle`].

pub mod oracle;

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::chain::{BasisIndex, ChainParams};
use crate::drive::{DriveRhs, Pulse};
use crate::error::{Error, Result};
use crate::state::{Picture, StateVector};

/// Tolerated deviation of `‖D‖²` from 1 during integration.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Tolerance on the normalization of an initial state.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-9;

/// How the time step is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPolicy {
    /// Steps per period of the fastest rotating term.
    pub points_per_period: u32,
    /// Upper bound on the step, μs.
    pub max_dt: f64,
    /// Repeat the run at half the step and report the difference.
    pub convergence_check: bool,
    /// Fail with [`Error::NormDrift`] when the norm drifts past [`NORM_TOLERANCE`].
    pub strict_norm: bool,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            points_per_period: 32,
            max_dt: 1e-3,
            convergence_check: false,
            strict_norm: true,
        }
    }
}

impl StepPolicy {
    /// `min(max_dt, 2π / (points_per_period · ω_fast))`, where `ω_fast` is the
    /// fastest rotation rate of any driven term.
    pub fn dt_for(&self, rhs: &DriveRhs) -> f64 {
        let fast = rhs.fastest_rate();
        if fast == 0.0 {
            return self.max_dt;
        }
        self.max_dt.min(TAU / (self.points_per_period as f64 * fast))
    }

    fn halved(&self) -> Self {
        Self {
            points_per_period: self.points_per_period * 2,
            max_dt: self.max_dt / 2.0,
            convergence_check: false,
            strict_norm: self.strict_norm,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.points_per_period == 0 || self.max_dt.is_nan() || self.max_dt <= 0.0 {
            return Err(Error::InvalidParams(
                "step policy needs points_per_period > 0 and max_dt > 0".into(),
            ));
        }
        Ok(())
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Interaction-picture amplitudes.
    pub state: Vec<Complex64>,
    /// `|‖D‖² − 1|`.
    pub norm_error: f64,
}

/// Time-ordered samples of an integrated pulse sequence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Start of the first pulse followed by the end of each pulse.
    pub pulse_boundaries: Vec<f64>,
    /// Largest norm error over every step, not only the sampled ones.
    pub max_norm_error: f64,
    pub steps: usize,
    /// Max component difference against a run at half the step, when requested.
    pub convergence_delta: Option<f64>,
}

impl Trajectory {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("trajectory always holds the initial sample")
    }

    pub fn final_state(&self) -> StateVector {
        StateVector::new(self.final_sample().state.clone(), Picture::Interaction)
            .expect("trajectory states have power-of-two dimension")
    }

    pub fn end_time(&self) -> f64 {
        self.final_sample().t
    }

    /// Sample recorded exactly at time `t`, if any.
    pub fn sample_at(&self, t: f64) -> Option<&Sample> {
        self.samples.iter().find(|s| s.t == t)
    }
}

/// Classical RK4 integrator with preallocated stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4Stepper {
    rhs: DriveRhs,
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4Stepper {
    pub fn new(rhs: DriveRhs) -> Self {
        let zeros = vec![Complex64::new(0.0, 0.0); rhs.dim()];
        Self {
            rhs,
            k1: zeros.clone(),
            k2: zeros.clone(),
            k3: zeros.clone(),
            k4: zeros.clone(),
            tmp: zeros,
        }
    }

    pub fn rhs(&self) -> &DriveRhs {
        &self.rhs
    }

    /// Advances `d` from `t` to `t + dt` in place.
    pub fn step(&mut self, t: f64, d: &mut [Complex64], dt: f64) {
        let half = 0.5 * dt;
        self.rhs.eval(t, d, &mut self.k1);
        for ((x, a), k) in self.tmp.iter_mut().zip(d.iter()).zip(&self.k1) {
            *x = a + k * half;
        }
        self.rhs.eval(t + half, &self.tmp, &mut self.k2);
        for ((x, a), k) in self.tmp.iter_mut().zip(d.iter()).zip(&self.k2) {
            *x = a + k * half;
        }
        self.rhs.eval(t + half, &self.tmp, &mut self.k3);
        for ((x, a), k) in self.tmp.iter_mut().zip(d.iter()).zip(&self.k3) {
            *x = a + k * dt;
        }
        self.rhs.eval(t + dt, &self.tmp, &mut self.k4);
        let sixth = dt / 6.0;
        for (i, a) in d.iter_mut().enumerate() {
            *a += (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]) * sixth;
        }
    }
}

/// A single RK4 step of the interaction-picture equations.
pub fn step_rk4(
    params: &ChainParams,
    pulse: &Pulse,
    t: f64,
    d: &StateVector,
    dt: f64,
) -> Result<StateVector> {
    d.expect_picture(Picture::Interaction)?;
    if d.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            actual: d.dim(),
        });
    }
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidParams(format!("step dt = {dt} must be positive")));
    }
    let mut stepper = Rk4Stepper::new(DriveRhs::new(params, pulse));
    let mut amps = d.amplitudes().to_vec();
    stepper.step(t, &mut amps, dt);
    StateVector::new(amps, Picture::Interaction)
}

fn norm_error(d: &[Complex64]) -> f64 {
    (d.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs()
}

fn check_initial(params: &ChainParams, d0: &StateVector) -> Result<()> {
    d0.expect_picture(Picture::Interaction)?;
    if d0.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            actual: d0.dim(),
        });
    }
    let deviation = norm_error(d0.amplitudes());
    if deviation > INPUT_NORM_TOLERANCE {
        return Err(Error::NotNormalized { deviation });
    }
    Ok(())
}

/// Integrates one pulse starting at global time `t_start`.
///
/// The returned segment holds the samples strictly after `t_start`: every
/// `sample_every` steps and always the pulse end. Its `pulse_boundaries` are
/// `[t_start, t_end]`.
pub fn evolve_pulse(
    params: &ChainParams,
    d0: &StateVector,
    t_start: f64,
    pulse: &Pulse,
    policy: &StepPolicy,
    sample_every: usize,
) -> Result<Trajectory> {
    check_initial(params, d0)?;
    evolve_segment(params, d0, t_start, pulse, policy, sample_every)
}

/// [`evolve_pulse`] without the input normalization check, for continuing a
/// sequence whose drift is governed by the policy.
fn evolve_segment(
    params: &ChainParams,
    d0: &StateVector,
    t_start: f64,
    pulse: &Pulse,
    policy: &StepPolicy,
    sample_every: usize,
) -> Result<Trajectory> {
    policy.validate()?;
    let duration = pulse.duration(params)?;
    let stride = sample_every.max(1);
    let mut seg = Trajectory {
        pulse_boundaries: vec![t_start, t_start + duration],
        ..Default::default()
    };
    if duration == 0.0 {
        return Ok(seg);
    }

    let mut stepper = Rk4Stepper::new(DriveRhs::new(params, pulse));
    let dt = policy.dt_for(stepper.rhs());
    let n_steps = (duration / dt).ceil().max(1.0) as usize;
    let mut d = d0.amplitudes().to_vec();

    for i in 0..n_steps {
        let t = t_start + i as f64 * dt;
        let last = i + 1 == n_steps;
        let h = if last { duration - i as f64 * dt } else { dt };
        stepper.step(t, &mut d, h);
        let t_next = if last { t_start + duration } else { t_start + (i + 1) as f64 * dt };

        let err = norm_error(&d);
        seg.max_norm_error = seg.max_norm_error.max(err);
        if policy.strict_norm && err > NORM_TOLERANCE {
            return Err(Error::NormDrift {
                t: t_next,
                drift: err,
                tolerance: NORM_TOLERANCE,
            });
        }
        if last || (i + 1) % stride == 0 {
            seg.samples.push(Sample {
                t: t_next,
                state: d.clone(),
                norm_error: err,
            });
        }
    }
    seg.steps = n_steps;
    Ok(seg)
}

fn integrate(
    params: &ChainParams,
    initial: BasisIndex,
    pulses: &[Pulse],
    policy: &StepPolicy,
    sample_every: usize,
) -> Result<Trajectory> {
    if pulses.is_empty() {
        return Err(Error::EmptySequence);
    }
    let d0 = StateVector::basis(params.dim(), initial.value(), Picture::Interaction)?;
    let mut traj = Trajectory {
        samples: vec![Sample {
            t: 0.0,
            state: d0.amplitudes().to_vec(),
            norm_error: 0.0,
        }],
        pulse_boundaries: vec![0.0],
        ..Default::default()
    };
    let mut t = 0.0;
    let mut current = d0;
    for pulse in pulses {
        let seg = evolve_segment(params, &current, t, pulse, policy, sample_every)?;
        t = seg.pulse_boundaries[1];
        traj.pulse_boundaries.push(t);
        traj.max_norm_error = traj.max_norm_error.max(seg.max_norm_error);
        traj.steps += seg.steps;
        traj.samples.extend(seg.samples);
        current = traj.final_state();
    }
    Ok(traj)
}

/// Runs a pulse sequence from a basis state with continuous global time.
pub fn run_sequence(
    params: &ChainParams,
    initial: BasisIndex,
    pulses: &[Pulse],
    policy: &StepPolicy,
    sample_every: usize,
) -> Result<Trajectory> {
    if initial.value() >= params.dim() {
        return Err(Error::BasisOutOfRange {
            index: initial.value(),
            dim: params.dim(),
        });
    }
    let mut traj = integrate(params, initial, pulses, policy, sample_every)?;
    if policy.convergence_check {
        let fine = integrate(params, initial, pulses, &policy.halved(), usize::MAX)?;
        let delta = traj
            .final_sample()
            .state
            .iter()
            .zip(&fine.final_sample().state)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        traj.convergence_delta = Some(delta);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::flip_resonance;
    use std::f64::consts::PI;

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn random_state(seed: u64) -> StateVector {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<Complex64> = (0..8)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= n);
        StateVector::new(v, Picture::Interaction).unwrap()
    }

    #[test]
    fn undriven_step_is_exact_identity() {
        let p = ChainParams::new_unchecked(vec![100.0 * TAU, 200.0 * TAU, 400.0 * TAU], 5.0 * TAU, 0.0, 0.0).unwrap();
        let pulse = Pulse::new(105.0 * TAU, 0.0, 0.0).unwrap();
        let d = random_state(1);
        for dt in [1e-6, 1e-3, 0.5] {
            let next = step_rk4(&p, &pulse, 0.2, &d, dt).unwrap();
            assert_eq!(next.amplitudes(), d.amplitudes());
        }
    }

    #[test]
    fn local_error_is_fifth_order() {
        let p = ChainParams::reference();
        let pulse = Pulse::new(404.8 * TAU, 0.3, PI).unwrap();
        let d = random_state(7);
        let t = 1.3;
        let defect = |dt: f64| {
            let one = step_rk4(&p, &pulse, t, &d, dt).unwrap();
            let h = step_rk4(&p, &pulse, t, &d, dt / 2.0).unwrap();
            let two = step_rk4(&p, &pulse, t + dt / 2.0, &h, dt / 2.0).unwrap();
            max_diff(one.amplitudes(), two.amplitudes())
        };
        let ratio = defect(4e-5) / defect(2e-5);
        assert!((24.0..40.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn resonant_half_pi_transfer_matches_rabi_formula() {
        let p = ChainParams::from_mhz(&[100.0, 200.0, 400.0], 0.0, 0.0, 0.1).unwrap();
        let carrier = flip_resonance(&p, p.basis(0).unwrap(), 0).unwrap();
        let pulse = Pulse::new(carrier, 0.0, PI / 2.0).unwrap();
        let traj = run_sequence(&p, p.basis(0).unwrap(), &[pulse], &StepPolicy::default(), 1).unwrap();
        assert!((traj.end_time() - 2.5).abs() < 1e-12);
        let p1 = traj.final_sample().state[1].norm_sqr();
        assert!((p1 - 0.5).abs() < 1e-3, "{p1}");
    }

    #[test]
    fn zero_angle_sequence_keeps_initial_sample_only() {
        let p = ChainParams::reference();
        let pulse = Pulse::new(105.2 * TAU, 0.0, 0.0).unwrap();
        let traj = run_sequence(&p, p.basis(0).unwrap(), &[pulse], &StepPolicy::default(), 1).unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.final_sample().state[0], Complex64::new(1.0, 0.0));
        assert_eq!(traj.steps, 0);
    }

    #[test]
    fn step_size_follows_policy() {
        let p = ChainParams::reference();
        let pulse = Pulse::new(404.8 * TAU, 0.0, PI).unwrap();
        let rhs = DriveRhs::new(&p, &pulse);
        let dt = StepPolicy::default().dt_for(&rhs);
        // fastest term: 405.2 + 404.8 (×2π)
        assert!((dt - 1.0 / (32.0 * 810.0)).abs() < 1e-12, "{dt}");
        let capped = StepPolicy {
            max_dt: 1e-6,
            ..Default::default()
        };
        assert_eq!(capped.dt_for(&rhs), 1e-6);
    }

    #[test]
    fn samples_are_strictly_increasing_and_end_at_tau() {
        let p = ChainParams::reference();
        let pulses = [
            Pulse::new(105.2 * TAU, 0.0, PI / 2.0).unwrap(),
            Pulse::new(404.8 * TAU, 0.0, PI).unwrap(),
        ];
        let traj = run_sequence(&p, p.basis(0).unwrap(), &pulses, &StepPolicy::default(), 997).unwrap();
        assert_eq!(traj.samples[0].t, 0.0);
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert!((traj.end_time() - 7.5).abs() < 1e-12);
        assert_eq!(traj.pulse_boundaries.len(), 3);
        assert!(traj.sample_at(traj.pulse_boundaries[1]).is_some());
        assert!(traj.max_norm_error <= NORM_TOLERANCE);
    }

    #[test]
    fn deterministic() {
        let p = ChainParams::reference();
        let pulses = [Pulse::new(105.2 * TAU, 0.2, PI / 2.0).unwrap()];
        let a = run_sequence(&p, p.basis(0).unwrap(), &pulses, &StepPolicy::default(), 50).unwrap();
        let b = run_sequence(&p, p.basis(0).unwrap(), &pulses, &StepPolicy::default(), 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coarse_steps_trip_the_norm_assertion() {
        let p = ChainParams::reference();
        let pulses = [Pulse::new(404.8 * TAU, 0.0, PI).unwrap()];
        let coarse = StepPolicy {
            points_per_period: 2,
            max_dt: 1.0,
            ..Default::default()
        };
        let err = run_sequence(&p, p.basis(0).unwrap(), &pulses, &coarse, 1).unwrap_err();
        assert!(matches!(err, Error::NormDrift { .. }));
        assert!(err.is_numerical());
        let lenient = StepPolicy {
            strict_norm: false,
            ..coarse
        };
        let traj = run_sequence(&p, p.basis(0).unwrap(), &pulses, &lenient, 1).unwrap();
        assert!(traj.max_norm_error > NORM_TOLERANCE);
    }

    #[test]
    fn input_validation() {
        let p = ChainParams::reference();
        let pulse = Pulse::new(105.2 * TAU, 0.0, PI).unwrap();
        let bad = StateVector::new(vec![Complex64::new(0.9, 0.0); 8], Picture::Interaction).unwrap();
        assert!(matches!(
            evolve_pulse(&p, &bad, 0.0, &pulse, &StepPolicy::default(), 1),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            run_sequence(&p, p.basis(0).unwrap(), &[], &StepPolicy::default(), 1),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn convergence_check_reports_small_delta() {
        let p = ChainParams::reference();
        let pulses = [Pulse::new(105.2 * TAU, 0.0, PI / 2.0).unwrap()];
        let policy = StepPolicy {
            convergence_check: true,
            ..Default::default()
        };
        let traj = run_sequence(&p, p.basis(0).unwrap(), &pulses, &policy, 1000).unwrap();
        let delta = traj.convergence_delta.unwrap();
        assert!(delta < 1e-6, "{delta}");
    }
}

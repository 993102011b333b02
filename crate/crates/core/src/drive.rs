//! The RF perturbation `W(t)` and the interaction-picture equations of motion.
//!
//! `W = −(Ω/2) Σ_q [e^{i(ωt+φ)} I_q⁺ + e^{−i(ωt+φ)} I_q⁻]` with `I⁺` taking a
//! spin from the excited state (bit 1) to the ground state (bit 0). The element
//! `⟨m|W|k⟩` with `m` holding spin `q` in the ground state therefore carries
//! `e^{+i(ωt+φ)}`, which cancels against `e^{iω_mk t}` (ω_mk < 0) at resonance.

use num_complex::Complex64;

use crate::chain::{eigenenergies, BasisIndex, ChainParams};
use crate::error::{Error, Result};
use crate::state::{Picture, StateVector};

/// A rectangular resonant pulse. Time is global; the phase reference is the
/// pulse's own `phase`, not carried over from earlier pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    carrier: f64,
    phase: f64,
    angle: f64,
}

impl Pulse {
    /// `carrier` in rad/μs, `phase` and `angle` in radians. A zero angle is a
    /// no-op pulse of zero duration.
    pub fn new(carrier: f64, phase: f64, angle: f64) -> Result<Self> {
        if !carrier.is_finite() || !phase.is_finite() || !angle.is_finite() {
            return Err(Error::InvalidPulse("non-finite pulse parameter".into()));
        }
        if angle < 0.0 {
            return Err(Error::InvalidPulse(format!("angle {angle} must be non-negative")));
        }
        Ok(Self {
            carrier,
            phase,
            angle,
        })
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// θ/Ω in μs.
    pub fn duration(&self, params: &ChainParams) -> Result<f64> {
        if self.angle == 0.0 {
            return Ok(0.0);
        }
        if params.rabi().is_nan() || params.rabi() <= 0.0 {
            return Err(Error::InvalidPulse("a non-zero angle needs a positive Rabi frequency".into()));
        }
        Ok(self.angle / params.rabi())
    }
}

/// `W_mk/ħ` in rad/μs at time `t`.
pub fn w_element(
    params: &ChainParams,
    pulse: &Pulse,
    t: f64,
    m: BasisIndex,
    k: BasisIndex,
) -> Result<Complex64> {
    let dim = params.dim();
    for x in [m, k] {
        if x.value() >= dim {
            return Err(Error::BasisOutOfRange {
                index: x.value(),
                dim,
            });
        }
    }
    let diff = m.value() ^ k.value();
    if diff.count_ones() != 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lowering_into_m = m.value() & diff == 0;
    let arg = pulse.carrier * t + pulse.phase;
    let z = Complex64::from_polar(1.0, if lowering_into_m { arg } else { -arg });
    Ok(-0.5 * params.rabi() * z)
}

#[derive(Debug, Clone, Copy)]
struct Coupling {
    m: usize,
    k: usize,
    /// Rotation rate of `W_mk e^{iω_mk t}`: `±ω + ω_mk`.
    rate: f64,
    offset: f64,
}

/// Precomputed right-hand side `Ḋ_m = −i Σ_k (W_mk/ħ) D_k e^{iω_mk t}` for one
/// pulse. Only Hamming-distance-1 pairs contribute.
#[derive(Debug, Clone)]
pub struct DriveRhs {
    dim: usize,
    carrier: f64,
    max_gap: f64,
    half_rabi: f64,
    couplings: Vec<Coupling>,
}

impl DriveRhs {
    pub fn new(params: &ChainParams, pulse: &Pulse) -> Self {
        let energies = eigenenergies(params);
        let dim = params.dim();
        let mut couplings = Vec::with_capacity(dim * params.n_spins());
        for m in 0..dim {
            for q in 0..params.n_spins() {
                let k = m ^ (1 << q);
                let sign = if (m >> q) & 1 == 0 { 1.0 } else { -1.0 };
                couplings.push(Coupling {
                    m,
                    k,
                    rate: sign * pulse.carrier + (energies[m] - energies[k]),
                    offset: sign * pulse.phase,
                });
            }
        }
        let max_gap = couplings
            .iter()
            .map(|c| (energies[c.m] - energies[c.k]).abs())
            .fold(0.0, f64::max);
        Self {
            dim,
            carrier: pulse.carrier,
            max_gap,
            half_rabi: 0.5 * params.rabi(),
            couplings,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest coupled transition frequency plus the carrier, rad/μs. Bounds
    /// every rotation rate appearing in the right-hand side.
    pub fn fastest_rate(&self) -> f64 {
        self.max_gap + self.carrier.abs()
    }

    /// Writes `Ḋ` into `out`. Slices must both have length `dim`.
    pub fn eval(&self, t: f64, d: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(d.len(), self.dim);
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        // −i · (−Ω/2) = +iΩ/2
        let scale = Complex64::new(0.0, self.half_rabi);
        for c in &self.couplings {
            let phase = Complex64::from_polar(1.0, c.rate * t + c.offset);
            out[c.m] += scale * phase * d[c.k];
        }
    }
}

/// Interaction-picture derivative `Ḋ` at time `t`.
pub fn rhs(params: &ChainParams, pulse: &Pulse, t: f64, d: &StateVector) -> Result<Vec<Complex64>> {
    d.expect_picture(Picture::Interaction)?;
    if d.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            actual: d.dim(),
        });
    }
    let system = DriveRhs::new(params, pulse);
    let mut out = vec![Complex64::new(0.0, 0.0); d.dim()];
    system.eval(t, d.amplitudes(), &mut out);
    Ok(out)
}

fn rephase(amps: &[Complex64], energies: &[f64], t: f64, sign: f64) -> Vec<Complex64> {
    amps.iter()
        .zip(energies)
        .map(|(a, e)| a * Complex64::from_polar(1.0, sign * e * t))
        .collect()
}

/// `C_m = D_m e^{−iE_m t}`.
pub fn to_schrodinger(d: &StateVector, t: f64, params: &ChainParams) -> Result<StateVector> {
    d.expect_picture(Picture::Interaction)?;
    check_dim(params, d)?;
    let c = rephase(d.amplitudes(), &eigenenergies(params), t, -1.0);
    StateVector::new(c, Picture::Schrodinger)
}

/// `D_m = C_m e^{+iE_m t}`.
pub fn to_interaction(c: &StateVector, t: f64, params: &ChainParams) -> Result<StateVector> {
    c.expect_picture(Picture::Schrodinger)?;
    check_dim(params, c)?;
    let d = rephase(c.amplitudes(), &eigenenergies(params), t, 1.0);
    StateVector::new(d, Picture::Interaction)
}

fn check_dim(params: &ChainParams, s: &StateVector) -> Result<()> {
    if s.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            actual: s.dim(),
        });
    }
    Ok(())
}

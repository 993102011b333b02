//! Populations, single-spin expectation values and overlap fidelity.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{Picture, StateVector};

/// Normalization slack accepted by [`fidelity`].
pub const FIDELITY_NORM_TOLERANCE: f64 = 1e-6;

/// Operational threshold on `|F|` for a well-formed entangled state.
pub const WELL_DEFINED_FIDELITY: f64 = 0.98;

/// `⟨I^z⟩`, `⟨I^x⟩`, `⟨I^y⟩` of every spin.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinExpectations {
    pub iz: Vec<f64>,
    pub ix: Vec<f64>,
    pub iy: Vec<f64>,
}

impl SpinExpectations {
    /// Length of the Bloch vector of spin `q` (at most ½).
    pub fn bloch_length(&self, q: usize) -> f64 {
        (self.iz[q].powi(2) + self.ix[q].powi(2) + self.iy[q].powi(2)).sqrt()
    }
}

/// Complex overlap `⟨expected|numerical⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityResult {
    pub value: Complex64,
    pub modulus: f64,
}

fn check_spin(c: &StateVector, q: usize) -> Result<()> {
    if q >= c.n_spins() {
        return Err(Error::SpinOutOfRange {
            spin: q,
            n_spins: c.n_spins(),
        });
    }
    Ok(())
}

/// `|C_k|²` for every basis state.
pub fn populations(c: &StateVector) -> Vec<f64> {
    c.amplitudes().iter().map(|a| a.norm_sqr()).collect()
}

/// `⟨I_q^z⟩ = ½ Σ_x (−1)^{bit_q(x)} |C_x|²`. Identical in either picture.
pub fn expect_iz(c: &StateVector, q: usize) -> Result<f64> {
    check_spin(c, q)?;
    let sum: f64 = c
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(x, a)| if (x >> q) & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum();
    Ok(0.5 * sum)
}

/// `(⟨I_q^x⟩, ⟨I_q^y⟩)` as the real and imaginary parts of
/// `Σ_{x: bit_q(x)=0} C*_{x+2^q} C_x`.
///
/// Pass Schrödinger-picture amplitudes to get the laboratory-frame precession;
/// on interaction-picture amplitudes the result is the rotating-frame value.
pub fn expect_ixy(c: &StateVector, q: usize) -> Result<(f64, f64)> {
    check_spin(c, q)?;
    let amps = c.amplitudes();
    let sum: Complex64 = (0..amps.len())
        .filter(|x| (x >> q) & 1 == 0)
        .map(|x| amps[x + (1 << q)].conj() * amps[x])
        .sum();
    Ok((sum.re, sum.im))
}

/// All spin expectations of a state.
pub fn spin_expectations(c: &StateVector) -> SpinExpectations {
    let n = c.n_spins();
    let mut out = SpinExpectations {
        iz: Vec::with_capacity(n),
        ix: Vec::with_capacity(n),
        iy: Vec::with_capacity(n),
    };
    for q in 0..n {
        out.iz.push(expect_iz(c, q).expect("spin index in range"));
        let (x, y) = expect_ixy(c, q).expect("spin index in range");
        out.ix.push(x);
        out.iy.push(y);
    }
    out
}

/// `F = ⟨expected|numerical⟩ = Σ_k expected*_k numerical_k`.
pub fn fidelity(expected: &StateVector, numerical: &StateVector) -> Result<FidelityResult> {
    if expected.dim() != numerical.dim() {
        return Err(Error::DimensionMismatch {
            expected: expected.dim(),
            actual: numerical.dim(),
        });
    }
    for s in [expected, numerical] {
        let deviation = (s.norm_sqr() - 1.0).abs();
        if deviation > FIDELITY_NORM_TOLERANCE {
            return Err(Error::NotNormalized { deviation });
        }
    }
    let value: Complex64 = expected
        .amplitudes()
        .iter()
        .zip(numerical.amplitudes())
        .map(|(e, n)| e.conj() * n)
        .sum();
    Ok(FidelityResult {
        value,
        modulus: value.norm(),
    })
}

/// Index of the partner state of the two-pulse protocol: end spins 0 and
/// N−1 excited (`|101⟩` for three spins).
pub fn bell_partner(n_spins: usize) -> usize {
    1 | (1 << (n_spins - 1))
}

/// `(|0…0⟩ + sign·|1 0…0 1⟩)/√2` in the interaction picture; `sign` is ±1.
pub fn bell_target(n_spins: usize, sign: f64) -> StateVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_spins];
    amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[bell_partner(n_spins)] = Complex64::new(sign.signum() * FRAC_1_SQRT_2, 0.0);
    StateVector::new(amps, Picture::Interaction).expect("power-of-two dimension")
}

/// `arg(D_partner / D_0)` in (−π, π].
pub fn relative_phase(d: &StateVector) -> f64 {
    let a = d[0];
    let b = d[bell_partner(d.n_spins())];
    (a.conj() * b).arg()
}

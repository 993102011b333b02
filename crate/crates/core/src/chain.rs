//! Static algebra of the undriven Ising chain.
//!
//! Spin `q` of basis state `x` is bit `q` of `x` (0 = ground). Frequencies are
//! angular, in rad/μs; `ħ = 1` throughout so energies are reported as `E/ħ`.

use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};

/// Parameters of a linear chain of spin-½ nuclei with first- and
/// second-neighbor Ising couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams {
    larmor: Vec<f64>,
    j1: f64,
    j2: f64,
    rabi: f64,
}

impl ChainParams {
    /// Builds a validated parameter set. All frequencies in rad/μs.
    ///
    /// Larmor frequencies must be positive and pairwise distinct so that each
    /// spin is individually addressable; couplings must be non-negative and
    /// the Rabi frequency positive.
    pub fn new(larmor: Vec<f64>, j1: f64, j2: f64, rabi: f64) -> Result<Self> {
        let params = Self::new_unchecked(larmor, j1, j2, rabi)?;
        for (q, &w) in params.larmor.iter().enumerate() {
            if w.is_nan() || w <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "larmor[{q}] = {w} must be strictly positive"
                )));
            }
        }
        for a in 0..params.larmor.len() {
            for b in (a + 1)..params.larmor.len() {
                if params.larmor[a] == params.larmor[b] {
                    return Err(Error::InvalidParams(format!(
                        "larmor[{a}] and larmor[{b}] coincide; spins are not addressable"
                    )));
                }
            }
        }
        if j1 < 0.0 || j2 < 0.0 {
            return Err(Error::InvalidParams(format!(
                "couplings must be non-negative (j1 = {j1}, j2 = {j2})"
            )));
        }
        if rabi.is_nan() || rabi <= 0.0 {
            return Err(Error::InvalidParams(format!("rabi = {rabi} must be positive")));
        }
        Ok(params)
    }

    /// Skips the physical-validity checks (addressability, signs). Only the
    /// spin count and finiteness are enforced. Useful for degenerate algebraic
    /// checks such as an undriven or uncoupled chain.
    pub fn new_unchecked(larmor: Vec<f64>, j1: f64, j2: f64, rabi: f64) -> Result<Self> {
        if larmor.len() < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 2 spins, got {}",
                larmor.len()
            )));
        }
        if larmor.len() > 20 {
            return Err(Error::InvalidParams(format!(
                "{} spins exceeds the supported maximum of 20",
                larmor.len()
            )));
        }
        if larmor.iter().chain([&j1, &j2, &rabi]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite frequency".into()));
        }
        Ok(Self {
            larmor,
            j1,
            j2,
            rabi,
        })
    }

    /// Same as [`ChainParams::new`] but with every frequency given in units of
    /// 2π·MHz (multiplied by 2π on ingestion).
    pub fn from_mhz(larmor: &[f64], j1: f64, j2: f64, rabi: f64) -> Result<Self> {
        Self::new(
            larmor.iter().map(|w| w * TAU).collect(),
            j1 * TAU,
            j2 * TAU,
            rabi * TAU,
        )
    }

    /// ω = (100, 200, 400), J = 5, J′ = 0.2, Ω = 0.1, all ×2π rad/μs.
    pub fn reference() -> Self {
        Self::from_mhz(&[100.0, 200.0, 400.0], 5.0, 0.2, 0.1).expect("reference parameters are valid")
    }

    pub fn n_spins(&self) -> usize {
        self.larmor.len()
    }

    /// Hilbert-space dimension 2ᴺ.
    pub fn dim(&self) -> usize {
        1 << self.larmor.len()
    }

    pub fn larmor(&self) -> &[f64] {
        &self.larmor
    }

    pub fn j1(&self) -> f64 {
        self.j1
    }

    pub fn j2(&self) -> f64 {
        self.j2
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn with_j2(&self, j2: f64) -> Result<Self> {
        Self::new(self.larmor.clone(), self.j1, j2, self.rabi)
    }

    pub fn basis(&self, value: usize) -> Result<BasisIndex> {
        BasisIndex::new(value, self.n_spins())
    }

    fn check(&self, x: BasisIndex) -> Result<()> {
        if x.0 >= self.dim() {
            return Err(Error::BasisOutOfRange {
                index: x.0,
                dim: self.dim(),
            });
        }
        Ok(())
    }

    fn check_spin(&self, q: usize) -> Result<()> {
        if q >= self.n_spins() {
            return Err(Error::SpinOutOfRange {
                spin: q,
                n_spins: self.n_spins(),
            });
        }
        Ok(())
    }
}

/// A computational basis state; bit `q` holds the state of spin `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex(usize);

impl BasisIndex {
    pub fn new(value: usize, n_spins: usize) -> Result<Self> {
        let dim = 1usize << n_spins;
        if value >= dim {
            return Err(Error::BasisOutOfRange { index: value, dim });
        }
        Ok(Self(value))
    }

    pub fn value(self) -> usize {
        self.0
    }

    /// State of spin `q`: 0 (ground) or 1 (excited).
    pub fn bit(self, q: usize) -> usize {
        (self.0 >> q) & 1
    }

    pub fn flip(self, q: usize) -> Self {
        Self(self.0 ^ (1 << q))
    }

    /// Ket label with the highest spin leftmost, e.g. `|101⟩` for 5 in a 3-spin chain.
    pub fn label(self, n_spins: usize) -> String {
        let bits: String = (0..n_spins)
            .rev()
            .map(|q| if self.bit(q) == 1 { '1' } else { '0' })
            .collect();
        format!("|{bits}⟩")
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[inline]
fn parity_sign(bits: usize) -> f64 {
    if bits & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn energy_unchecked(params: &ChainParams, x: usize) -> f64 {
    let n = params.n_spins();
    let bit = |q: usize| (x >> q) & 1;
    let zeeman: f64 = (0..n).map(|q| parity_sign(bit(q)) * params.larmor[q]).sum();
    let first: f64 = (0..n - 1).map(|q| parity_sign(bit(q) + bit(q + 1))).sum();
    let second: f64 = (0..n.saturating_sub(2))
        .map(|q| parity_sign(bit(q) + bit(q + 2)))
        .sum();
    -0.5 * (zeeman + params.j1 * first + params.j2 * second)
}

/// Diagonal energy `E_x/ħ` of the undriven Hamiltonian, rad/μs.
pub fn eigenenergy(params: &ChainParams, x: BasisIndex) -> Result<f64> {
    params.check(x)?;
    Ok(energy_unchecked(params, x.0))
}

/// All 2ᴺ eigenenergies, indexed by basis state.
pub fn eigenenergies(params: &ChainParams) -> Vec<f64> {
    (0..params.dim()).map(|x| energy_unchecked(params, x)).collect()
}

/// Transition frequency `ω_mk = (E_m − E_k)/ħ`.
pub fn omega_mk(params: &ChainParams, m: BasisIndex, k: BasisIndex) -> Result<f64> {
    Ok(eigenenergy(params, m)? - eigenenergy(params, k)?)
}

/// Positive carrier frequency resonant with flipping spin `q` while the rest
/// of the chain sits in configuration `x`.
pub fn flip_resonance(params: &ChainParams, x: BasisIndex, q: usize) -> Result<f64> {
    params.check(x)?;
    params.check_spin(q)?;
    Ok(omega_mk(params, x.flip(q), x)?.abs())
}

/// A single-spin transition `from → to` (spin `spin` raised from ground).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from: BasisIndex,
    pub to: BasisIndex,
    pub spin: usize,
    pub frequency: f64,
}

/// Every upward single-flip transition of the chain, ordered by spin then by
/// lower state.
pub fn single_flip_transitions(params: &ChainParams) -> Vec<Transition> {
    let energies = eigenenergies(params);
    let mut out = Vec::with_capacity(params.n_spins() << (params.n_spins() - 1));
    for q in 0..params.n_spins() {
        for x in 0..params.dim() {
            if (x >> q) & 1 == 0 {
                let y = x ^ (1 << q);
                out.push(Transition {
                    from: BasisIndex(x),
                    to: BasisIndex(y),
                    spin: q,
                    frequency: (energies[y] - energies[x]).abs(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_eq::close;

    mod approx_eq {
        pub fn close(a: f64, b: f64, tol: f64) -> bool {
            (a - b).abs() <= tol * (1.0 + b.abs())
        }
    }

    /// Eq (4b) for three spins, written out term by term.
    fn three_spin_energy(w: [f64; 3], j: f64, jp: f64, i: [i32; 3]) -> f64 {
        let s = |p: i32| if p % 2 == 0 { 1.0 } else { -1.0 };
        -0.5 * (s(i[2]) * w[2]
            + s(i[1]) * w[1]
            + s(i[0]) * w[0]
            + j * (s(i[0] + i[1]) + s(i[1] + i[2]))
            + s(i[0] + i[2]) * jp)
    }

    #[test]
    fn reference_energies() {
        let p = ChainParams::reference();
        let e0 = eigenenergy(&p, p.basis(0).unwrap()).unwrap();
        let e1 = eigenenergy(&p, p.basis(1).unwrap()).unwrap();
        assert!(close(e0, -355.1 * TAU, 1e-13));
        assert!(close(e1, -249.9 * TAU, 1e-13));
    }

    #[test]
    fn matches_written_out_three_spin_formula() {
        let p = ChainParams::from_mhz(&[100.0, 200.0, 400.0], 5.0, 0.2, 0.1).unwrap();
        for x in 0..8usize {
            let bits = [(x & 1) as i32, ((x >> 1) & 1) as i32, ((x >> 2) & 1) as i32];
            let expect = three_spin_energy([100.0 * TAU, 200.0 * TAU, 400.0 * TAU], 5.0 * TAU, 0.2 * TAU, bits);
            let got = eigenenergy(&p, p.basis(x).unwrap()).unwrap();
            assert!(close(got, expect, 1e-14), "x={x}: {got} vs {expect}");
        }
    }

    #[test]
    fn vanishing_parameters_give_zero_energy() {
        let p = ChainParams::new_unchecked(vec![0.0; 3], 0.0, 0.0, 0.0).unwrap();
        for x in 0..8 {
            assert_eq!(eigenenergy(&p, p.basis(x).unwrap()).unwrap(), 0.0);
        }
    }

    #[test]
    fn transition_frequencies() {
        let p = ChainParams::reference();
        let b = |x| p.basis(x).unwrap();
        assert!(close(omega_mk(&p, b(1), b(0)).unwrap(), 105.2 * TAU, 1e-13));
        assert!(close(omega_mk(&p, b(5), b(1)).unwrap(), 404.8 * TAU, 1e-13));
        assert_eq!(omega_mk(&p, b(3), b(3)).unwrap(), 0.0);
        assert!(close(flip_resonance(&p, b(0), 0).unwrap(), 105.2 * TAU, 1e-13));
        assert!(close(flip_resonance(&p, b(1), 2).unwrap(), 404.8 * TAU, 1e-13));
    }

    #[test]
    fn uncoupled_spin_resonates_at_larmor() {
        let p = ChainParams::from_mhz(&[100.0, 200.0, 400.0], 0.0, 0.0, 0.1).unwrap();
        for x in 0..8 {
            let f = flip_resonance(&p, p.basis(x).unwrap(), 1).unwrap();
            assert!(close(f, 200.0 * TAU, 1e-14));
        }
    }

    #[test]
    fn spectator_configurations_split_into_four_lines() {
        let p = ChainParams::reference();
        let mut lines: Vec<f64> = (0..8)
            .filter(|x| x & 1 == 0)
            .map(|x| flip_resonance(&p, p.basis(x).unwrap(), 0).unwrap() / TAU)
            .collect();
        lines.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [94.8, 95.2, 104.8, 105.2];
        for (a, b) in lines.iter().zip(expect) {
            assert!(close(*a, b, 1e-13), "{a} vs {b}");
        }
    }

    #[test]
    fn index_errors() {
        let p = ChainParams::reference();
        assert!(matches!(p.basis(8), Err(Error::BasisOutOfRange { index: 8, dim: 8 })));
        assert!(matches!(
            flip_resonance(&p, p.basis(0).unwrap(), 3),
            Err(Error::SpinOutOfRange { spin: 3, .. })
        ));
        let small = BasisIndex::new(7, 3).unwrap();
        let two = ChainParams::from_mhz(&[100.0, 200.0], 5.0, 0.0, 0.1).unwrap();
        assert!(eigenenergy(&two, small).is_err());
    }

    #[test]
    fn rejects_unphysical_parameters() {
        assert!(ChainParams::from_mhz(&[100.0], 5.0, 0.2, 0.1).is_err());
        assert!(ChainParams::from_mhz(&[100.0, 100.0, 400.0], 5.0, 0.2, 0.1).is_err());
        assert!(ChainParams::from_mhz(&[100.0, -200.0, 400.0], 5.0, 0.2, 0.1).is_err());
        assert!(ChainParams::from_mhz(&[100.0, 200.0, 400.0], -5.0, 0.2, 0.1).is_err());
        assert!(ChainParams::from_mhz(&[100.0, 200.0, 400.0], 5.0, 0.2, 0.0).is_err());
        assert!(ChainParams::from_mhz(&[100.0, 200.0, f64::NAN], 5.0, 0.2, 0.1).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(BasisIndex::new(5, 3).unwrap().label(3), "|101⟩");
        assert_eq!(BasisIndex::new(1, 3).unwrap().label(3), "|001⟩");
    }

    #[test]
    fn transition_table_size() {
        let p = ChainParams::reference();
        assert_eq!(single_flip_transitions(&p).len(), 12);
    }
}

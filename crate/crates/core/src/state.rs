use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which representation a set of amplitudes lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    /// `D_m`: the diagonal phases `e^{-iE_m t}` factored out.
    Interaction,
    /// `C_m`: plain Schrödinger-picture amplitudes.
    Schrodinger,
}

impl Picture {
    pub fn name(self) -> &'static str {
        match self {
            Picture::Interaction => "interaction",
            Picture::Schrodinger => "schrodinger",
        }
    }
}

/// 2ᴺ complex amplitudes tagged with their picture.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    picture: Picture,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>, picture: Picture) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two().max(2),
                actual: dim,
            });
        }
        Ok(Self { amps, picture })
    }

    /// Basis state `|index⟩` with unit amplitude.
    pub fn basis(dim: usize, index: usize, picture: Picture) -> Result<Self> {
        if index >= dim {
            return Err(Error::BasisOutOfRange { index, dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(amps, picture)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_spins(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn expect_picture(&self, picture: Picture) -> Result<()> {
        if self.picture != picture {
            return Err(Error::WrongPicture {
                expected: picture.name(),
                actual: self.picture.name(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.amps[i]
    }
}

//! Simulation of a driven linear chain of spin-½ nuclei with first- and
//! second-neighbor Ising couplings, as used for NMR quantum computing.
//!
//! The workflow is: build [`ChainParams`], describe a pulse sequence as
//! [`Pulse`]s, integrate with [`integrator::run_sequence`], then evaluate
//! populations, spin expectations and fidelities via [`observables`].

pub mod chain;
pub mod drive;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod observables;
pub mod state;

pub use chain::{BasisIndex, ChainParams};
pub use drive::Pulse;
pub use error::{Error, Result};
pub use integrator::{StepPolicy, Trajectory};
pub use state::{Picture, StateVector};

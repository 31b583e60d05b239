//! Thermal-state preparation for the long-range Ising model by variational
//! imaginary-time evolution on a dense statevector, with an exact
//! enumeration oracle for the same observables.
//!
//! The pipeline is: [`lattice::Lattice`] → [`ising::IsingSpec`] →
//! [`ansatz::Ansatz`] → [`evolver::evolve`] → [`thermo::ThermoPoint`], and
//! [`ed::reference_curve`] produces the matching ground truth.

pub mod ansatz;
pub mod ed;
pub mod error;
pub mod evolver;
pub mod experiments;
pub mod ising;
pub mod lattice;
pub mod measure;
pub mod pauli;
pub mod statevector;
pub mod thermo;

pub use error::{Error, Result};

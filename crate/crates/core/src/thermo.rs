//! Fluctuation relations for the specific heat and susceptibility, with
//! `k_B = 1` so that `1/T = β`.

use crate::error::Result;
use crate::ising::Observables;
use crate::statevector::StateVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    /// Dimensionless inverse temperature `Jβ`.
    pub k: f64,
    pub energy: f64,
    pub energy_sq: f64,
    pub magnetization: f64,
    pub magnetization_sq: f64,
    /// Specific heat per site, `β² (⟨H²⟩ − ⟨H⟩²) / |Λ|`.
    pub cv: f64,
    /// Susceptibility per site, `β (⟨Z²⟩ − ⟨Z⟩²) / |Λ|`.
    pub chi: f64,
}

pub fn thermo_from_expectations(
    energy: f64,
    energy_sq: f64,
    magnetization: f64,
    magnetization_sq: f64,
    beta: f64,
    coupling: f64,
    volume: usize,
) -> ThermoPoint {
    let v = volume as f64;
    ThermoPoint {
        k: coupling * beta,
        energy,
        energy_sq,
        magnetization,
        magnetization_sq,
        cv: beta * beta * (energy_sq - energy * energy) / v,
        chi: beta * (magnetization_sq - magnetization * magnetization) / v,
    }
}

/// Diagonals of the four observables, precomputed once per model.
#[derive(Debug, Clone)]
pub struct ObservableDiagonals {
    pub energy: Vec<f64>,
    pub energy_sq: Vec<f64>,
    pub magnetization: Vec<f64>,
    pub magnetization_sq: Vec<f64>,
}

impl ObservableDiagonals {
    pub fn new(obs: &Observables) -> Result<Self> {
        Ok(Self {
            energy: obs.energy.diagonal_values()?,
            energy_sq: obs.energy_sq.diagonal_values()?,
            magnetization: obs.magnetization.diagonal_values()?,
            magnetization_sq: obs.magnetization_sq.diagonal_values()?,
        })
    }

    pub fn measure(&self, state: &StateVector, beta: f64, coupling: f64, volume: usize) -> ThermoPoint {
        thermo_from_expectations(
            state.expectation_diagonal(&self.energy),
            state.expectation_diagonal(&self.energy_sq),
            state.expectation_diagonal(&self.magnetization),
            state.expectation_diagonal(&self.magnetization_sq),
            beta,
            coupling,
            volume,
        )
    }
}

/// Evaluates all four observables on a state prepared at `τ = β/2`.
pub fn measure_thermal_point(
    state: &StateVector,
    observables: &Observables,
    beta: f64,
    coupling: f64,
    volume: usize,
) -> Result<ThermoPoint> {
    Ok(thermo_from_expectations(
        state.expectation(&observables.energy)?,
        state.expectation(&observables.energy_sq)?,
        state.expectation(&observables.magnetization)?,
        state.expectation(&observables.magnetization_sq)?,
        beta,
        coupling,
        volume,
    ))
}

//! Exact Gibbs averages by enumerating every spin configuration.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::ising::IsingSpec;
use crate::pauli::WeightedPauliSum;
use crate::thermo::{thermo_from_expectations, ThermoPoint};

pub const MAX_SITES: usize = 24;

const CHUNK: usize = 1 << 12;

/// Exact thermal averages at one inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsSums {
    /// `ln Z_β`.
    pub log_partition: f64,
    pub energy: f64,
    pub energy_sq: f64,
    pub magnetization: f64,
    pub magnetization_sq: f64,
}

impl GibbsSums {
    pub fn partition(&self) -> f64 {
        self.log_partition.exp()
    }
}

#[derive(Default, Clone, Copy)]
struct Partial {
    w: f64,
    e: f64,
    e2: f64,
    m: f64,
    m2: f64,
}

/// Sums over all `2^n` basis states of a diagonal Hamiltonian. Bit `q` set
/// means spin `q` points down (`Z_q = −1`).
pub fn gibbs_sums(hamiltonian: &WeightedPauliSum, beta: f64, volume: usize) -> Result<GibbsSums> {
    if !hamiltonian.is_diagonal() {
        return invalid("enumeration oracle needs a diagonal Hamiltonian");
    }
    let n = hamiltonian.num_qubits();
    if volume != n {
        return invalid(format!("volume {volume} does not match {n} spins"));
    }
    if n > MAX_SITES {
        return Err(Error::Resource(format!(
            "{n} sites exceeds the enumeration limit of {MAX_SITES}"
        )));
    }
    if !beta.is_finite() || beta < 0.0 {
        return invalid(format!("beta must be finite and non-negative, got {beta}"));
    }
    let energies = hamiltonian.diagonal_values()?;
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let partials: Vec<Partial> = energies
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut p = Partial::default();
            for (k, &e) in chunk.iter().enumerate() {
                let s = c * CHUNK + k;
                let w = (-beta * (e - e_min)).exp();
                let mag = n as f64 - 2.0 * s.count_ones() as f64;
                p.w += w;
                p.e += w * e;
                p.e2 += w * e * e;
                p.m += w * mag;
                p.m2 += w * mag * mag;
            }
            p
        })
        .collect();
    let total = partials.iter().fold(Partial::default(), |a, p| Partial {
        w: a.w + p.w,
        e: a.e + p.e,
        e2: a.e2 + p.e2,
        m: a.m + p.m,
        m2: a.m2 + p.m2,
    });
    Ok(GibbsSums {
        log_partition: total.w.ln() - beta * e_min,
        energy: total.e / total.w,
        energy_sq: total.e2 / total.w,
        magnetization: total.m / total.w,
        magnetization_sq: total.m2 / total.w,
    })
}

pub fn thermo_point(spec: &IsingSpec, hamiltonian: &WeightedPauliSum, k: f64) -> Result<ThermoPoint> {
    let beta = k / spec.coupling;
    let volume = spec.lattice.volume();
    let g = gibbs_sums(hamiltonian, beta, volume)?;
    if spec.field == 0.0 && g.magnetization.abs() > 1e-12 * volume as f64 {
        return Err(Error::Numerical(format!(
            "zero-field magnetization {} breaks spin-flip symmetry",
            g.magnetization
        )));
    }
    Ok(thermo_from_expectations(
        g.energy,
        g.energy_sq,
        g.magnetization,
        g.magnetization_sq,
        beta,
        spec.coupling,
        volume,
    ))
}

/// Exact curve at `β = K / J` for every `K` in the grid.
pub fn reference_curve(spec: &IsingSpec, k_grid: &[f64]) -> Result<Vec<ThermoPoint>> {
    if let Some(k) = k_grid.iter().find(|k| !(**k >= 0.0)) {
        return invalid(format!("K grid must be non-negative, got {k}"));
    }
    let h = spec.build_hamiltonian()?;
    k_grid.iter().map(|&k| thermo_point(spec, &h, k)).collect()
}

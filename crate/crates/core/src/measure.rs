//! Reference implementation of the measurement-based imaginary-time step.
//!
//! Each small step `e^{−Δτ H_m}` (normalized) is replaced by a unitary
//! `e^{−i Σ_I a_I σ_I}` whose real coefficients are fitted with full access
//! to the statevector. The circuit then applies the Trotterized product
//! `Π_I e^{−i a_I σ_I}` in pool order. The fitted `a_I` are rotation angles:
//! the step length is absorbed into them.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::ansatz::relevant_strings_for_bond;
use crate::error::{invalid, Result};
use crate::evolver::solve_theta_dot;
use crate::ising::IsingSpec;
use crate::lattice::Lattice;
use crate::pauli::{Pauli, PauliString, WeightedPauliSum};
use crate::statevector::{self, inner, PauliMasks, StateVector};

/// Largest support on which [`widened_pool`] enumerates every string.
pub const MAX_POOL_SUPPORT: usize = 6;

const FIT_RCOND: f64 = 1e-8;
const MAX_REFINEMENTS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    pub string: PauliString,
    pub angle: f64,
}

/// One fitted Trotter factor.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureStep {
    pub pool: Vec<PauliString>,
    pub coefficients: Vec<f64>,
    pub dtau: f64,
}

/// Time slices of the measurement-based circuit; each slice holds the
/// fitted rotations for every Hamiltonian term.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureCircuit {
    pub layers: Vec<Vec<Rotation>>,
}

impl MeasureCircuit {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn gates(&self) -> Vec<Rotation> {
        self.layers.iter().flatten().cloned().collect()
    }

    /// One line per gate: `layer k: STRING -> param m = angle`.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        let mut m = 0;
        for (k, layer) in self.layers.iter().enumerate() {
            for r in layer {
                let _ = writeln!(out, "layer {k}: {} -> param {m} = {:.12e}", r.string, r.angle);
                m += 1;
            }
        }
        out
    }
}

/// Pool-construction knob for [`build_measure_circuit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoolChoice {
    /// `Z_i Y_j`, `Y_i Z_j` for each bond.
    #[default]
    Bond,
    /// Every odd-`Y` string on the sites within this distance of the bond.
    Widened(usize),
}

/// Every string with an odd number of `Y` letters supported inside the
/// sites within Manhattan distance `radius` of `i` or `j`.
pub fn widened_pool(lattice: &Lattice, i: usize, j: usize, radius: usize) -> Result<Vec<PauliString>> {
    let n = lattice.volume();
    let mut support = Vec::new();
    for q in 0..n {
        let d = lattice
            .manhattan_distance_pbc(q, i)?
            .min(lattice.manhattan_distance_pbc(q, j)?);
        if d <= radius {
            support.push(q);
        }
    }
    if support.len() > MAX_POOL_SUPPORT {
        return invalid(format!(
            "widened pool support of {} sites exceeds {MAX_POOL_SUPPORT}",
            support.len()
        ));
    }
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut pool = Vec::new();
    for code in 0..4usize.pow(support.len() as u32) {
        let mut c = code;
        let ops: Vec<(usize, Pauli)> = support
            .iter()
            .map(|&q| {
                let p = letters[c % 4];
                c /= 4;
                (q, p)
            })
            .collect();
        let s = PauliString::from_sparse(n, &ops)?;
        if s.y_parity_odd() {
            pool.push(s);
        }
    }
    Ok(pool)
}

/// `e^{−i Σ a_I σ_I} |ψ>` by its Taylor series.
fn exp_of_sum(amps: &[Complex64], masks: &[PauliMasks], coeffs: &[f64]) -> Vec<Complex64> {
    let mut out = amps.to_vec();
    let mut term = amps.to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); amps.len()];
    for k in 1..200 {
        // term ← (−iA) term / k
        let mut next = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (m, &c) in masks.iter().zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            scratch.copy_from_slice(&term);
            statevector::apply_pauli(&mut scratch, m);
            let f = Complex64::new(0.0, -c / k as f64);
            for (n, s) in next.iter_mut().zip(&scratch) {
                *n += f * s;
            }
        }
        term = next;
        let size = term.iter().map(|a| a.norm_sqr()).sum::<f64>();
        for (o, t) in out.iter_mut().zip(&term) {
            *o += t;
        }
        if size < 1e-36 {
            break;
        }
    }
    out
}

/// Fits the rotation angles of one step against the normalized
/// `e^{−Δτ term}|ψ>` for a diagonal `term`.
///
/// Starts from the linearized normal equations and refines with
/// Gauss-Newton until the update stalls. Rank-deficient systems get the
/// minimal-norm update.
pub fn fit_step_coefficients(
    state: &StateVector,
    term: &WeightedPauliSum,
    pool: &[PauliString],
    dtau: f64,
) -> Result<Vec<f64>> {
    if pool.is_empty() {
        return invalid("fit needs a non-empty pool");
    }
    if !term.is_diagonal() {
        return invalid("fitted term must be diagonal");
    }
    if term.num_qubits() != state.num_qubits() || pool.iter().any(|s| s.num_qubits() != state.num_qubits()) {
        return invalid("term, pool and state disagree on the qubit count");
    }
    if !(dtau >= 0.0) || !dtau.is_finite() {
        return invalid(format!("step length must be non-negative, got {dtau}"));
    }
    let mut coeffs = vec![0.0; pool.len()];
    if dtau == 0.0 {
        return Ok(coeffs);
    }
    let diag = term.diagonal_values()?;
    let target = StateVector::from_amplitudes(
        state
            .amplitudes()
            .iter()
            .zip(&diag)
            .map(|(a, e)| a * (-dtau * e).exp())
            .collect(),
    )?;
    let masks: Vec<PauliMasks> = pool.iter().map(PauliMasks::new).collect();
    let minus_i = Complex64::new(0.0, -1.0);
    for _ in 0..=MAX_REFINEMENTS {
        let current = exp_of_sum(state.amplitudes(), &masks, &coeffs);
        let residual: Vec<Complex64> = target
            .amplitudes()
            .iter()
            .zip(&current)
            .map(|(t, c)| t - c)
            .collect();
        let jac: Vec<Vec<Complex64>> = masks
            .iter()
            .map(|m| {
                let mut d = current.clone();
                statevector::apply_pauli(&mut d, m);
                d.iter_mut().for_each(|a| *a *= minus_i);
                d
            })
            .collect();
        let k = pool.len();
        let gram = DMatrix::from_fn(k, k, |a, b| inner(&jac[a], &jac[b]).re);
        let rhs = DVector::from_iterator(k, jac.iter().map(|j| inner(j, &residual).re));
        let (delta, _) = solve_theta_dot(&gram, &rhs, FIT_RCOND);
        for (c, d) in coeffs.iter_mut().zip(delta.iter()) {
            *c += d;
        }
        if delta.amax() < 1e-16 {
            break;
        }
    }
    Ok(coeffs)
}

pub fn apply_rotations(state: &mut StateVector, gates: &[Rotation]) -> Result<()> {
    for g in gates {
        state.apply_pauli_rotation(&g.string, g.angle)?;
    }
    Ok(())
}

/// `τ/Δτ` fitted slices from `|+…+>`; every slice runs through the
/// Hamiltonian terms in canonical order.
pub fn build_measure_circuit(
    spec: &IsingSpec,
    tau: f64,
    dtau: f64,
    pools: PoolChoice,
) -> Result<MeasureCircuit> {
    spec.validate()?;
    if !(dtau > 0.0) || !(tau >= 0.0) {
        return invalid("measurement circuit needs dtau > 0 and tau >= 0");
    }
    let ratio = tau / dtau;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return invalid(format!("tau/dtau = {ratio} is not an integer"));
    }
    let steps = steps as usize;
    let n = spec.num_qubits();
    let mut bonds = Vec::new();
    for p in spec.pairs() {
        let zz = PauliString::from_sparse(n, &[(p.i, Pauli::Z), (p.j, Pauli::Z)])?;
        let term = WeightedPauliSum::from_terms(n, [(zz, -spec.bond_strength(p.distance))])?;
        let pool = match pools {
            PoolChoice::Bond => relevant_strings_for_bond(n, p.i, p.j)?.to_vec(),
            PoolChoice::Widened(r) => widened_pool(&spec.lattice, p.i, p.j, r)?,
        };
        bonds.push((term, pool));
    }
    let mut state = StateVector::plus(n)?;
    let mut layers = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut layer = Vec::new();
        for (term, pool) in &bonds {
            let coeffs = fit_step_coefficients(&state, term, pool, dtau)?;
            for (s, &a) in pool.iter().zip(&coeffs) {
                state.apply_pauli_rotation(s, a)?;
                layer.push(Rotation {
                    string: s.clone(),
                    angle: a,
                });
            }
        }
        layers.push(layer);
    }
    Ok(MeasureCircuit { layers })
}

/// Moves each rotation as far left as commutation allows and merges it
/// into an earlier rotation on the same string.
pub fn merge_commuting_rotations(circuit: &[Rotation]) -> Result<Vec<Rotation>> {
    let mut out: Vec<Rotation> = Vec::with_capacity(circuit.len());
    'gates: for g in circuit {
        for k in (0..out.len()).rev() {
            if out[k].string == g.string {
                out[k].angle += g.angle;
                continue 'gates;
            }
            if !out[k].string.commutes(&g.string)? {
                break;
            }
        }
        out.push(g.clone());
    }
    Ok(out)
}

/// `sqrt(2 (1 − |<a|b>|))`, a phase-insensitive distance between states.
pub fn state_distance(a: &StateVector, b: &StateVector) -> f64 {
    (2.0 * (1.0 - a.inner(b).norm())).max(0.0).sqrt()
}

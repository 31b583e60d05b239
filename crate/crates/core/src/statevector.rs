//! Dense statevector simulation.
//!
//! Basis states are indexed with qubit 0 as the least significant bit. The
//! Pauli-Y convention is `Y|0> = i|1>`, `Y|1> = -i|0>`, so `Y|+> = -i|->`.

use num_complex::Complex64;

use crate::ansatz::Ansatz;
use crate::error::{invalid, Error, Result};
use crate::pauli::{PauliString, WeightedPauliSum};

/// Default ceiling on the number of qubits a state may allocate.
pub const DEFAULT_MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A Pauli string lowered to bit masks for fast application.
///
/// `σ|s> = i^{n_y} (-1)^{|s & z|} |s ^ x>`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PauliMasks {
    x: u64,
    z: u64,
    y_phase: Complex64,
}

impl PauliMasks {
    pub(crate) fn new(s: &PauliString) -> Self {
        let (x, z) = s.masks();
        let y_phase = match s.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Self { x, z, y_phase }
    }

    #[inline]
    fn phase(&self, basis: usize) -> Complex64 {
        if (basis as u64 & self.z).count_ones() % 2 == 0 {
            self.y_phase
        } else {
            -self.y_phase
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|+>^{⊗n}` under the default memory guard.
    pub fn plus(num_qubits: usize) -> Result<Self> {
        Self::plus_with_limit(num_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn plus_with_limit(num_qubits: usize, max_qubits: usize) -> Result<Self> {
        check_size(num_qubits, max_qubits)?;
        let dim = 1usize << num_qubits;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self {
            num_qubits,
            amps: vec![a; dim],
        })
    }

    /// Wraps explicit amplitudes; the vector is normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return invalid(format!("amplitude count {dim} is not a power of two >= 2"));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        let mut s = Self { num_qubits, amps };
        let n = s.norm();
        if !(n > 0.0) || !n.is_finite() {
            return invalid("amplitudes have zero or non-finite norm");
        }
        s.scale(1.0 / n);
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn scale(&mut self, f: f64) {
        for a in &mut self.amps {
            *a *= f;
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amps, &other.amps)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_string(&self, s: &PauliString) -> Result<()> {
        if s.num_qubits() != self.num_qubits {
            return invalid(format!(
                "Pauli string on {} qubits applied to a {}-qubit state",
                s.num_qubits(),
                self.num_qubits
            ));
        }
        Ok(())
    }

    /// In place `|ψ> ← e^{-iθσ}|ψ> = cos θ|ψ> − i sin θ σ|ψ>`.
    pub fn apply_pauli_rotation(&mut self, s: &PauliString, angle: f64) -> Result<()> {
        self.check_string(s)?;
        rotate(&mut self.amps, &PauliMasks::new(s), angle);
        Ok(())
    }

    /// In place `|ψ> ← σ|ψ>`.
    pub fn apply_pauli(&mut self, s: &PauliString) -> Result<()> {
        self.check_string(s)?;
        apply_pauli(&mut self.amps, &PauliMasks::new(s));
        Ok(())
    }

    /// `<ψ|O|ψ>` for a real-weighted Pauli sum. Diagonal terms use the
    /// probability fast path; others go through `σ|ψ>`.
    pub fn expectation(&self, observable: &WeightedPauliSum) -> Result<f64> {
        if observable.num_qubits() != self.num_qubits {
            return invalid("observable and state have different qubit counts");
        }
        let mut total = 0.0;
        for (s, c) in observable.terms() {
            let m = PauliMasks::new(s);
            let value = if s.is_diagonal() {
                self.amps
                    .iter()
                    .enumerate()
                    .map(|(b, a)| a.norm_sqr() * m.phase(b).re)
                    .sum::<f64>()
            } else {
                let mut moved = self.amps.clone();
                apply_pauli(&mut moved, &m);
                inner(&self.amps, &moved).re
            };
            total += c * value;
        }
        Ok(total)
    }

    /// `Σ_s |ψ_s|² d_s` for a precomputed diagonal.
    pub fn expectation_diagonal(&self, diagonal: &[f64]) -> f64 {
        self.amps
            .iter()
            .zip(diagonal)
            .map(|(a, d)| a.norm_sqr() * d)
            .sum()
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }
}

fn check_size(num_qubits: usize, max_qubits: usize) -> Result<()> {
    if num_qubits == 0 {
        return invalid("a state needs at least one qubit");
    }
    if num_qubits > max_qubits || num_qubits >= 63 {
        return Err(Error::Resource(format!(
            "{num_qubits} qubits exceeds the statevector budget of {max_qubits}"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

pub(crate) fn apply_pauli(amps: &mut [Complex64], m: &PauliMasks) {
    if m.x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= m.phase(b);
        }
        return;
    }
    let high = 1usize << (63 - m.x.leading_zeros());
    let x = m.x as usize;
    for s in 0..amps.len() {
        if s & high != 0 {
            continue;
        }
        let t = s ^ x;
        let (a_s, a_t) = (amps[s], amps[t]);
        amps[t] = m.phase(s) * a_s;
        amps[s] = m.phase(t) * a_t;
    }
}

pub(crate) fn rotate(amps: &mut [Complex64], m: &PauliMasks, angle: f64) {
    let (sin, cos) = angle.sin_cos();
    // −i sin θ
    let k = Complex64::new(0.0, -sin);
    if m.x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= cos + k * m.phase(b);
        }
        return;
    }
    let high = 1usize << (63 - m.x.leading_zeros());
    let x = m.x as usize;
    for s in 0..amps.len() {
        if s & high != 0 {
            continue;
        }
        let t = s ^ x;
        let (a_s, a_t) = (amps[s], amps[t]);
        amps[t] = a_t * cos + k * m.phase(s) * a_s;
        amps[s] = a_s * cos + k * m.phase(t) * a_t;
    }
}

/// `U(θ) |input>` for an ansatz.
pub fn prepare(ansatz: &Ansatz, params: &[f64], input: &StateVector) -> Result<StateVector> {
    ansatz.check_params(params)?;
    let mut state = input.clone();
    for g in ansatz.gates() {
        state.apply_pauli_rotation(&g.string, params[g.param])?;
    }
    Ok(state)
}

/// `∂|φ(θ)>/∂θ_μ = U_N…U_{μ+1} (−iσ_μ) U_μ…U_1 |input>`.
///
/// Each parameter drives exactly one gate, so the result has unit norm.
pub fn derivative_state(
    ansatz: &Ansatz,
    params: &[f64],
    index: usize,
    input: &StateVector,
) -> Result<StateVector> {
    ansatz.check_params(params)?;
    if index >= ansatz.num_params() {
        return invalid(format!(
            "parameter index {index} out of range for {} parameters",
            ansatz.num_params()
        ));
    }
    let mut state = input.clone();
    for g in ansatz.gates() {
        state.apply_pauli_rotation(&g.string, params[g.param])?;
        if g.param == index {
            state.apply_pauli(&g.string)?;
            for a in state.amps_mut() {
                *a *= Complex64::new(0.0, -1.0);
            }
        }
    }
    Ok(state)
}

/// `e^{−τH}|+>^{⊗n}`, normalized, for a diagonal `H`.
pub fn exact_qite_state(hamiltonian: &WeightedPauliSum, tau: f64) -> Result<StateVector> {
    if !hamiltonian.is_diagonal() {
        return invalid("exact imaginary-time oracle needs a diagonal Hamiltonian");
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return invalid(format!("imaginary time must be non-negative, got {tau}"));
    }
    check_size(hamiltonian.num_qubits(), DEFAULT_MAX_QUBITS)?;
    let energies = hamiltonian.diagonal_values()?;
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let amps = energies
        .iter()
        .map(|e| Complex64::new((-tau * (e - e_min)).exp(), 0.0))
        .collect();
    StateVector::from_amplitudes(amps)
}

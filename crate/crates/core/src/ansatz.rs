//! Variational ansatz synthesis from the per-bond imaginary-time generators.
//!
//! Each Ising bond `Z_i Z_j` contributes the two generators `Z_i Y_j` and
//! `Y_i Z_j`. One layer applies every `Z_i Y_j` gate in canonical pair
//! order, then every `Y_i Z_j` gate. Layers are repeated `L` times and every
//! gate gets its own parameter.

use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::evolver::{self, EvolverConfig};
use crate::ising::IsingSpec;
use crate::pauli::{Pauli, PauliString, WeightedPauliSum};
use crate::statevector::StateVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub string: PauliString,
    pub param: usize,
}

/// `U(θ) = U_N(θ_N) … U_1(θ_1)` with `U_k = e^{-iθ_k σ_k}`; gates are stored
/// in application order.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    num_qubits: usize,
    gates: Vec<Gate>,
    /// First gate index of every layer.
    layer_starts: Vec<usize>,
}

impl Ansatz {
    /// Repeats `template` `layers` times. This is also the hook for ansatz
    /// families other than the two-string bond generators.
    pub fn from_layer_template(
        num_qubits: usize,
        template: &[PauliString],
        layers: usize,
    ) -> Result<Self> {
        if layers < 1 {
            return invalid("ansatz needs at least one layer");
        }
        if let Some(s) = template.iter().find(|s| s.num_qubits() != num_qubits) {
            return invalid(format!("template string {s} has the wrong qubit count"));
        }
        let mut gates = Vec::with_capacity(template.len() * layers);
        let mut layer_starts = Vec::with_capacity(layers);
        for _ in 0..layers {
            layer_starts.push(gates.len());
            for s in template {
                let param = gates.len();
                gates.push(Gate {
                    string: s.clone(),
                    param,
                });
            }
        }
        Ok(Self {
            num_qubits,
            gates,
            layer_starts,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.gates.len()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_starts.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn layer_starts(&self) -> &[usize] {
        &self.layer_starts
    }

    /// Layer index of gate `g`.
    pub fn layer_of(&self, g: usize) -> usize {
        self.layer_starts.partition_point(|&s| s <= g) - 1
    }

    pub(crate) fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.gates.len() {
            return invalid(format!(
                "expected {} parameters, got {}",
                self.gates.len(),
                params.len()
            ));
        }
        Ok(())
    }

    /// Keeps gates for which `keep` is true, re-indexing parameters in
    /// gate order. Empty layers are dropped.
    fn retain(&self, keep: &[bool]) -> Ansatz {
        let mut gates = Vec::new();
        let mut layer_starts = Vec::new();
        for (layer, &start) in self.layer_starts.iter().enumerate() {
            let end = self
                .layer_starts
                .get(layer + 1)
                .copied()
                .unwrap_or(self.gates.len());
            let first = gates.len();
            for g in start..end {
                if keep[g] {
                    let param = gates.len();
                    gates.push(Gate {
                        string: self.gates[g].string.clone(),
                        param,
                    });
                }
            }
            if gates.len() > first {
                layer_starts.push(first);
            }
        }
        Ansatz {
            num_qubits: self.num_qubits,
            gates,
            layer_starts,
        }
    }

    /// One line per gate: `layer k: STRING -> param m`.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for (g, gate) in self.gates.iter().enumerate() {
            let _ = writeln!(out, "layer {}: {} -> param {}", self.layer_of(g), gate.string, gate.param);
        }
        out
    }
}

/// `Z_i Y_j` and `Y_i Z_j` for the bond `(i, j)`.
pub fn relevant_strings_for_bond(num_qubits: usize, i: usize, j: usize) -> Result<[PauliString; 2]> {
    if i == j {
        return invalid(format!("bond needs two distinct sites, got ({i}, {j})"));
    }
    Ok([
        PauliString::from_sparse(num_qubits, &[(i, Pauli::Z), (j, Pauli::Y)])?,
        PauliString::from_sparse(num_qubits, &[(i, Pauli::Y), (j, Pauli::Z)])?,
    ])
}

pub fn build_ansatz(spec: &IsingSpec, layers: usize) -> Result<Ansatz> {
    spec.validate()?;
    let n = spec.num_qubits();
    let pairs = spec.pairs();
    let mut zy = Vec::with_capacity(pairs.len());
    let mut yz = Vec::with_capacity(pairs.len());
    for p in &pairs {
        let [a, b] = relevant_strings_for_bond(n, p.i, p.j)?;
        zy.push(a);
        yz.push(b);
    }
    zy.extend(yz);
    Ansatz::from_layer_template(n, &zy, layers)
}

/// Removes parameters that provably or observably never move.
///
/// Strings with an even number of `Y` letters are dropped outright (real
/// Hamiltonian, real initial state). The rest are kept only if `|θ|` or
/// `|θ̇|` exceeds `threshold` at some point during a `probe_steps`-step
/// evolution from `|+…+>`. A non-positive threshold disables the probe.
pub fn prune_irrelevant(
    ansatz: &Ansatz,
    hamiltonian: &WeightedPauliSum,
    probe_steps: usize,
    threshold: f64,
) -> Result<Ansatz> {
    if probe_steps < 1 {
        return invalid("pruning probe needs at least one step");
    }
    let keep: Vec<bool> = ansatz.gates.iter().map(|g| g.string.y_parity_odd()).collect();
    let odd = ansatz.retain(&keep);
    if threshold <= 0.0 || odd.num_params() == 0 {
        return Ok(odd);
    }
    let config = EvolverConfig {
        tau_max: probe_steps as f64 * EvolverConfig::default().dtau,
        record_stride: probe_steps,
        ..EvolverConfig::default()
    };
    let input = StateVector::plus(odd.num_qubits())?;
    let peak = evolver::probe_activity(&odd, hamiltonian, &input, &config, probe_steps)?;
    let keep: Vec<bool> = peak.iter().map(|&m| m > threshold).collect();
    Ok(odd.retain(&keep))
}

/// Bounds `D N_d / (2G) ≤ L* ≤ D N_d / 2` on the layer count beyond which
/// the layer-limited error plateaus.
pub fn estimate_transition_layers(dimension: usize, side: usize, gates_per_step: usize) -> Result<(f64, f64)> {
    if dimension == 0 || side == 0 || gates_per_step == 0 {
        return invalid("transition-layer estimate needs positive inputs");
    }
    let upper = (dimension * side) as f64 / 2.0;
    Ok((upper / gates_per_step as f64, upper))
}

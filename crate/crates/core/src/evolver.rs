//! McLachlan variational imaginary-time evolution.
//!
//! At every step the metric `M_{μν} = 2 Re<∂_μφ|∂_νφ>` and force
//! `V_μ = −2 Re<∂_μφ|H|φ>` are assembled on the current ansatz state, the
//! system `M θ̇ = V` is solved by a truncated pseudo-inverse and the
//! parameters take one Euler step.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::ansatz::Ansatz;
use crate::error::{invalid, Error, Result};
use crate::ising::IsingSpec;
use crate::pauli::WeightedPauliSum;
use crate::statevector::{self, inner, PauliMasks, StateVector};
use crate::thermo::{ObservableDiagonals, ThermoPoint};

/// Derivative states are cached when they fit in this many amplitudes;
/// larger problems use the streaming assembly.
const CACHE_AMPLITUDES: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolverConfig {
    pub dtau: f64,
    pub tau_max: f64,
    /// Relative eigenvalue cutoff of the pseudo-inverse.
    pub rcond: f64,
    /// Record every `record_stride` Euler steps.
    pub record_stride: usize,
    pub compute_residual: bool,
    pub max_qubits: usize,
}

impl Default for EvolverConfig {
    fn default() -> Self {
        Self {
            dtau: 0.002,
            tau_max: 0.5,
            rcond: 1e-8,
            record_stride: 5,
            compute_residual: false,
            max_qubits: statevector::DEFAULT_MAX_QUBITS,
        }
    }
}

impl EvolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dtau > 0.0) || !self.dtau.is_finite() {
            return invalid(format!("dtau must be positive, got {}", self.dtau));
        }
        if !(self.tau_max >= 0.0) || !self.tau_max.is_finite() {
            return invalid(format!("tau_max must be non-negative, got {}", self.tau_max));
        }
        if self.tau_max > 0.0 && self.dtau > self.tau_max {
            return invalid("dtau exceeds tau_max");
        }
        if !(self.rcond > 0.0 && self.rcond < 1.0) {
            return invalid(format!("rcond must lie in (0, 1), got {}", self.rcond));
        }
        if self.record_stride == 0 {
            return invalid("record stride must be at least 1");
        }
        Ok(())
    }

    /// Number of Euler steps needed to reach `tau_max`.
    pub fn num_steps(&self) -> usize {
        (self.tau_max / self.dtau + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveInfo {
    pub rank: usize,
    /// Every eigenvalue fell below the cutoff and `θ̇ = 0` was returned.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub taus: Vec<f64>,
    pub thetas: Vec<Vec<f64>>,
    pub thermo: Vec<ThermoPoint>,
    pub residuals: Vec<Option<f64>>,
    /// Smallest eigenvalue of `M` at each record (absent at the final one).
    pub min_metric_eigenvalues: Vec<Option<f64>>,
    /// Steps whose linear system was entirely below the cutoff.
    pub degenerate_steps: Vec<usize>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn last(&self) -> Option<&ThermoPoint> {
        self.thermo.last()
    }
}

fn check_ansatz_state(ansatz: &Ansatz, input: &StateVector) -> Result<()> {
    if ansatz.num_qubits() != input.num_qubits() {
        return invalid("ansatz and input state have different qubit counts");
    }
    Ok(())
}

/// All derivative states `∂_μ|φ>` in one sweep, plus `|φ>` itself.
fn derivative_states(
    ansatz: &Ansatz,
    params: &[f64],
    input: &StateVector,
) -> (Vec<Vec<Complex64>>, Vec<Complex64>) {
    let masks: Vec<PauliMasks> = ansatz.gates().iter().map(|g| PauliMasks::new(&g.string)).collect();
    let mut psi = input.amplitudes().to_vec();
    let mut derivs: Vec<Vec<Complex64>> = Vec::with_capacity(masks.len());
    let minus_i = Complex64::new(0.0, -1.0);
    for (k, (m, g)) in masks.iter().zip(ansatz.gates()).enumerate() {
        let theta = params[g.param];
        derivs.par_iter_mut().for_each(|d| statevector::rotate(d, m, theta));
        statevector::rotate(&mut psi, m, theta);
        let mut d = psi.clone();
        statevector::apply_pauli(&mut d, m);
        d.iter_mut().for_each(|a| *a *= minus_i);
        derivs.push(d);
        debug_assert_eq!(derivs.len(), k + 1);
    }
    (derivs, psi)
}

/// `(M, V, |φ>)` at `params`, with `V` built from the diagonal of `H`.
pub fn metric_and_force(
    ansatz: &Ansatz,
    params: &[f64],
    h_diag: &[f64],
    input: &StateVector,
) -> Result<(DMatrix<f64>, DVector<f64>, StateVector)> {
    ansatz.check_params(params)?;
    check_ansatz_state(ansatz, input)?;
    if h_diag.len() != input.amplitudes().len() {
        return invalid("Hamiltonian diagonal has the wrong length");
    }
    if ansatz.num_params().saturating_mul(h_diag.len()) <= CACHE_AMPLITUDES {
        Ok(cached_assembly(ansatz, params, h_diag, input))
    } else {
        Ok(streaming_assembly(ansatz, params, h_diag, input))
    }
}

fn cached_assembly(
    ansatz: &Ansatz,
    params: &[f64],
    h_diag: &[f64],
    input: &StateVector,
) -> (DMatrix<f64>, DVector<f64>, StateVector) {
    let n = ansatz.num_params();
    let (derivs, phi) = derivative_states(ansatz, params, input);
    let h_phi: Vec<Complex64> = phi.iter().zip(h_diag).map(|(a, e)| a * e).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|mu| (mu..n).map(|nu| 2.0 * inner(&derivs[mu], &derivs[nu]).re).collect())
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (mu, row) in rows.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            m[(mu, mu + off)] = v;
            m[(mu + off, mu)] = v;
        }
    }
    let v = DVector::from_iterator(n, derivs.iter().map(|d| -2.0 * inner(d, &h_phi).re));
    let phi = StateVector::from_amplitudes(phi).expect("ansatz state is normalized");
    (m, v, phi)
}

/// Memory-light assembly: `<∂_μφ|∂_νφ> = <σ_μψ_μ| U_{μ+1}†…U_ν† |σ_νψ_ν>`
/// for `μ < ν`, with `ψ_k` the state after gate `k`.
fn streaming_assembly(
    ansatz: &Ansatz,
    params: &[f64],
    h_diag: &[f64],
    input: &StateVector,
) -> (DMatrix<f64>, DVector<f64>, StateVector) {
    let n = ansatz.num_params();
    let gates = ansatz.gates();
    let masks: Vec<PauliMasks> = gates.iter().map(|g| PauliMasks::new(&g.string)).collect();
    let angles: Vec<f64> = gates.iter().map(|g| params[g.param]).collect();
    let mut phi = input.amplitudes().to_vec();
    for (m, &t) in masks.iter().zip(&angles) {
        statevector::rotate(&mut phi, m, t);
    }

    let mut m = DMatrix::zeros(n, n);
    let mut v = DVector::zeros(n);
    // V by the adjoint sweep: λ_μ = U_{μ+1}†…U_N† H|φ>.
    let mut psi = phi.clone();
    let mut lambda: Vec<Complex64> = phi.iter().zip(h_diag).map(|(a, e)| a * e).collect();
    for mu in (0..n).rev() {
        let mut s = psi.clone();
        statevector::apply_pauli(&mut s, &masks[mu]);
        // <∂_μφ|Hφ> = i <σ_μψ_μ|λ_μ>
        let z = Complex64::new(0.0, 1.0) * inner(&s, &lambda);
        v[mu] = -2.0 * z.re;
        statevector::rotate(&mut lambda, &masks[mu], -angles[mu]);
        statevector::rotate(&mut psi, &masks[mu], -angles[mu]);
    }

    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|nu| {
            // ψ_ν from the input
            let mut a = input.amplitudes().to_vec();
            for k in 0..=nu {
                statevector::rotate(&mut a, &masks[k], angles[k]);
            }
            let mut b = a.clone();
            statevector::apply_pauli(&mut b, &masks[nu]);
            let mut col = vec![0.0; nu + 1];
            col[nu] = 2.0 * inner(&b, &b).re;
            let mut tmp = vec![Complex64::new(0.0, 0.0); a.len()];
            for mu in (0..nu).rev() {
                statevector::rotate(&mut b, &masks[mu + 1], -angles[mu + 1]);
                statevector::rotate(&mut a, &masks[mu + 1], -angles[mu + 1]);
                tmp.copy_from_slice(&a);
                statevector::apply_pauli(&mut tmp, &masks[mu]);
                col[mu] = 2.0 * inner(&tmp, &b).re;
            }
            col
        })
        .collect();
    for (nu, col) in columns.iter().enumerate() {
        for (mu, &x) in col.iter().enumerate() {
            m[(mu, nu)] = x;
            m[(nu, mu)] = x;
        }
    }
    let phi = StateVector::from_amplitudes(phi).expect("ansatz state is normalized");
    (m, v, phi)
}

pub fn assemble_m(ansatz: &Ansatz, params: &[f64], input: &StateVector) -> Result<DMatrix<f64>> {
    let zeros = vec![0.0; input.amplitudes().len()];
    Ok(metric_and_force(ansatz, params, &zeros, input)?.0)
}

pub fn assemble_v(
    ansatz: &Ansatz,
    params: &[f64],
    hamiltonian: &WeightedPauliSum,
    input: &StateVector,
) -> Result<DVector<f64>> {
    let h_diag = hamiltonian.diagonal_values()?;
    Ok(metric_and_force(ansatz, params, &h_diag, input)?.1)
}

/// Minimal-norm solution of `M θ̇ = V` through the eigendecomposition of
/// the symmetric `M`, discarding eigenvalues below `rcond · λ_max`.
pub fn solve_theta_dot(m: &DMatrix<f64>, v: &DVector<f64>, rcond: f64) -> (DVector<f64>, SolveInfo) {
    let n = v.len();
    if n == 0 {
        return (DVector::zeros(0), SolveInfo { rank: 0, degenerate: true });
    }
    let eig = SymmetricEigen::new(m.clone());
    let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let cutoff = rcond * lambda_max;
    let mut x = DVector::zeros(n);
    let mut rank = 0;
    if lambda_max > 0.0 {
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l.abs() > cutoff {
                let u = eig.eigenvectors.column(k);
                x += u * (u.dot(v) / l);
                rank += 1;
            }
        }
    }
    (x, SolveInfo { rank, degenerate: rank == 0 })
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Frobenius norm of `dρ̂/dτ − 𝓛(ρ̂)` with `𝓛(ρ) = −{H, ρ} + 2 tr(ρH) ρ`.
///
/// Both operators are rank two: writing them as `|u><φ| + |φ><u|` with
/// `u = Σ θ̇_μ ∂_μφ + Hφ − <H>φ` gives `‖·‖² = 2<u|u> + 2 Re(<u|φ>²)`.
pub fn mclachlan_residual(
    ansatz: &Ansatz,
    params: &[f64],
    theta_dot: &[f64],
    hamiltonian: &WeightedPauliSum,
    input: &StateVector,
) -> Result<f64> {
    ansatz.check_params(params)?;
    if theta_dot.len() != params.len() {
        return invalid("theta_dot length differs from the parameter count");
    }
    check_ansatz_state(ansatz, input)?;
    let h_diag = hamiltonian.diagonal_values()?;
    let phi = statevector::prepare(ansatz, params, input)?;
    let mut u: Vec<Complex64> = phi
        .amplitudes()
        .iter()
        .zip(&h_diag)
        .map(|(a, e)| a * e)
        .collect();
    let energy = inner(phi.amplitudes(), &u).re;
    for (a, p) in u.iter_mut().zip(phi.amplitudes()) {
        *a -= p * energy;
    }
    for (mu, &rate) in theta_dot.iter().enumerate() {
        if rate == 0.0 {
            continue;
        }
        let d = statevector::derivative_state(ansatz, params, mu, input)?;
        for (a, b) in u.iter_mut().zip(d.amplitudes()) {
            *a += b * rate;
        }
    }
    let uu = inner(&u, &u).re;
    let up = inner(&u, phi.amplitudes());
    Ok((2.0 * uu + 2.0 * (up * up).re).max(0.0).sqrt())
}

/// Runs the variational loop from `|+…+>` and records thermodynamics at
/// `K = 2τJ` every `record_stride` steps.
pub fn evolve(ansatz: &Ansatz, spec: &IsingSpec, config: &EvolverConfig) -> Result<EvolutionTrace> {
    config.validate()?;
    spec.validate()?;
    if ansatz.num_qubits() != spec.num_qubits() {
        return invalid("ansatz does not match the model size");
    }
    let input = StateVector::plus_with_limit(spec.num_qubits(), config.max_qubits)?;
    let observables = spec.build_observables()?;
    let diags = ObservableDiagonals::new(&observables)?;
    let volume = spec.lattice.volume();
    let n_steps = config.num_steps();

    let mut params = vec![0.0; ansatz.num_params()];
    let mut trace = EvolutionTrace {
        taus: Vec::new(),
        thetas: Vec::new(),
        thermo: Vec::new(),
        residuals: Vec::new(),
        min_metric_eigenvalues: Vec::new(),
        degenerate_steps: Vec::new(),
    };

    for step in 0..=n_steps {
        let tau = step as f64 * config.dtau;
        let record = step % config.record_stride == 0;
        let last = step == n_steps;
        if last && !record {
            break;
        }
        let (m, v, phi) = metric_and_force(ansatz, &params, &diags.energy, &input)?;
        if record {
            trace.taus.push(tau);
            trace.thetas.push(params.clone());
            trace.thermo.push(diags.measure(&phi, 2.0 * tau, spec.coupling, volume));
            trace.min_metric_eigenvalues.push((!last).then(|| min_eigenvalue(&m)));
        }
        if last {
            if record {
                trace.residuals.push(None);
            }
            break;
        }
        let (theta_dot, info) = solve_theta_dot(&m, &v, config.rcond);
        if theta_dot.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite parameter velocity at tau = {tau}; try a smaller rcond cutoff"
            )));
        }
        if info.degenerate && v.norm() > 0.0 {
            trace.degenerate_steps.push(step);
        }
        if record {
            let residual = if config.compute_residual {
                Some(mclachlan_residual(
                    ansatz,
                    &params,
                    theta_dot.as_slice(),
                    &observables.energy,
                    &input,
                )?)
            } else {
                None
            };
            trace.residuals.push(residual);
        }
        for (p, d) in params.iter_mut().zip(theta_dot.iter()) {
            *p += config.dtau * d;
        }
    }
    Ok(trace)
}

/// Largest `max(|θ_μ|, |θ̇_μ|)` seen per parameter over `steps` Euler steps.
pub(crate) fn probe_activity(
    ansatz: &Ansatz,
    hamiltonian: &WeightedPauliSum,
    input: &StateVector,
    config: &EvolverConfig,
    steps: usize,
) -> Result<Vec<f64>> {
    let h_diag = hamiltonian.diagonal_values()?;
    let mut params = vec![0.0; ansatz.num_params()];
    let mut peak = vec![0.0f64; ansatz.num_params()];
    for _ in 0..steps {
        let (m, v, _) = metric_and_force(ansatz, &params, &h_diag, input)?;
        let (theta_dot, _) = solve_theta_dot(&m, &v, config.rcond);
        for ((p, d), pk) in params.iter_mut().zip(theta_dot.iter()).zip(peak.iter_mut()) {
            *pk = pk.max(d.abs());
            *p += config.dtau * d;
            *pk = pk.max(p.abs());
        }
    }
    Ok(peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::build_ansatz;
    use crate::ising::InteractionRange;

    fn two_qubit() -> (IsingSpec, Ansatz, WeightedPauliSum) {
        let spec = IsingSpec::new(crate::lattice::Lattice::chain(2).unwrap(), 1.0, InteractionRange::Infinite).unwrap();
        let a = build_ansatz(&spec, 1).unwrap();
        let h = spec.build_hamiltonian().unwrap();
        (spec, a, h)
    }

    #[test]
    fn metric_fixture() {
        let (_, a, h) = two_qubit();
        let input = StateVector::plus(2).unwrap();
        let m = assemble_m(&a, &[0.0, 0.0], &input).unwrap();
        assert!((m - DMatrix::from_element(2, 2, 2.0)).abs().max() < 1e-14);
        let v = assemble_v(&a, &[0.0, 0.0], &h, &input).unwrap();
        assert!((v - DVector::from_element(2, -2.0)).abs().max() < 1e-14);
    }

    #[test]
    fn single_parameter_metric() {
        let a = Ansatz::from_layer_template(2, &[crate::pauli::PauliString::parse(2, "Y0").unwrap()], 1).unwrap();
        let m = assemble_m(&a, &[0.4], &StateVector::plus(2).unwrap()).unwrap();
        assert!((m[(0, 0)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn solver_cases() {
        let m = DMatrix::from_element(2, 2, 2.0);
        let v = DVector::from_element(2, -2.0);
        let (x, info) = solve_theta_dot(&m, &v, 1e-8);
        assert!((x - DVector::from_element(2, -0.5)).abs().max() < 1e-14);
        assert_eq!(info.rank, 1);

        let m = DMatrix::identity(3, 3) * 2.0;
        let v = DVector::from_vec(vec![1.0, -4.0, 0.5]);
        let (x, _) = solve_theta_dot(&m, &v, 1e-8);
        assert!((x - &v / 2.0).abs().max() < 1e-15);

        let (x, _) = solve_theta_dot(&m, &DVector::zeros(3), 1e-8);
        assert_eq!(x, DVector::zeros(3));

        let (x, info) = solve_theta_dot(&DMatrix::zeros(2, 2), &DVector::from_element(2, 1.0), 1e-8);
        assert_eq!(x, DVector::zeros(2));
        assert!(info.degenerate);
    }

    #[test]
    fn streaming_matches_cached() {
        let spec = IsingSpec::new("3".parse().unwrap(), 1.0, InteractionRange::Finite(1.5)).unwrap();
        let a = build_ansatz(&spec, 2).unwrap();
        let h = spec.build_hamiltonian().unwrap().diagonal_values().unwrap();
        let input = StateVector::plus(3).unwrap();
        let params: Vec<f64> = (0..a.num_params()).map(|k| 0.1 * (k as f64 + 1.0).sin()).collect();
        let (m1, v1, p1) = cached_assembly(&a, &params, &h, &input);
        let (m2, v2, p2) = streaming_assembly(&a, &params, &h, &input);
        assert!((m1 - m2).abs().max() < 1e-12);
        assert!((v1 - v2).abs().max() < 1e-12);
        assert!((p1.inner(&p2).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residual_cases() {
        let (_, a, h) = two_qubit();
        let input = StateVector::plus(2).unwrap();
        let r = mclachlan_residual(&a, &[0.0, 0.0], &[-0.5, -0.5], &h, &input).unwrap();
        assert!(r < 1e-12);
        let r = mclachlan_residual(&a, &[0.0, 0.0], &[0.0, 0.0], &h, &input).unwrap();
        assert!(r > 0.1);
        let zero = WeightedPauliSum::zero(2);
        let r = mclachlan_residual(&a, &[0.3, -0.1], &[0.0, 0.0], &zero, &input).unwrap();
        assert!(r < 1e-14);
    }

    #[test]
    fn zero_tau_trace() {
        let (spec, a, _) = two_qubit();
        let config = EvolverConfig {
            tau_max: 0.0,
            ..EvolverConfig::default()
        };
        let t = evolve(&a, &spec, &config).unwrap();
        assert_eq!(t.len(), 1);
        let p = t.thermo[0];
        assert_eq!((p.k, p.cv, p.chi), (0.0, 0.0, 0.0));
        assert!((p.magnetization_sq - 2.0).abs() < 1e-14);
        assert_eq!(t.thetas[0], vec![0.0, 0.0]);
    }

    #[test]
    fn config_validation() {
        let bad = [
            EvolverConfig { dtau: 0.0, ..EvolverConfig::default() },
            EvolverConfig { rcond: 1.0, ..EvolverConfig::default() },
            EvolverConfig { record_stride: 0, ..EvolverConfig::default() },
            EvolverConfig { tau_max: 0.001, ..EvolverConfig::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
        assert_eq!(EvolverConfig::default().num_steps(), 250);
    }
}

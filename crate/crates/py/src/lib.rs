//! Python bindings: model specification, exact and variational
//! thermodynamics, and the cost model.

use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ising_qite::ansatz;
use ising_qite::ed;
use ising_qite::evolver::{self, EvolverConfig};
use ising_qite::experiments::{self, CostMode, ExperimentConfig};
use ising_qite::ising::{InteractionRange, IsingSpec};
use ising_qite::lattice::Lattice;
use ising_qite::measure::{self, PoolChoice};
use ising_qite::statevector;
use ising_qite::thermo;
use ising_qite::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(m) => PyValueError::new_err(m),
        Error::Resource(m) => PyMemoryError::new_err(m),
        Error::Numerical(m) => PyRuntimeError::new_err(m),
        Error::Io(e) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_range(alpha: &str) -> PyResult<InteractionRange> {
    alpha.parse().map_err(to_py)
}

#[pyclass(name = "ThermoPoint", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyThermoPoint {
    k: f64,
    energy: f64,
    energy_sq: f64,
    magnetization: f64,
    magnetization_sq: f64,
    cv: f64,
    chi: f64,
}

impl From<thermo::ThermoPoint> for PyThermoPoint {
    fn from(p: thermo::ThermoPoint) -> Self {
        Self {
            k: p.k,
            energy: p.energy,
            energy_sq: p.energy_sq,
            magnetization: p.magnetization,
            magnetization_sq: p.magnetization_sq,
            cv: p.cv,
            chi: p.chi,
        }
    }
}

#[pymethods]
impl PyThermoPoint {
    fn __repr__(&self) -> String {
        format!("ThermoPoint(K={}, Cv={}, chi={})", self.k, self.cv, self.chi)
    }
}

/// Long-range Ising model on a periodic hypercubic lattice.
#[pyclass(name = "IsingModel", frozen)]
struct PyIsingModel {
    spec: IsingSpec,
}

#[pymethods]
impl PyIsingModel {
    #[new]
    #[pyo3(signature = (dims, alpha = "inf", coupling = 1.0))]
    fn new(dims: Vec<usize>, alpha: &str, coupling: f64) -> PyResult<Self> {
        let lattice = Lattice::new(dims).map_err(to_py)?;
        let spec = IsingSpec::new(lattice, coupling, parse_range(alpha)?).map_err(to_py)?;
        Ok(Self { spec })
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.spec.num_qubits()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.spec.lattice.dims().to_vec()
    }

    /// `(i, j, distance)` for every interacting pair.
    fn pairs(&self) -> Vec<(usize, usize, usize)> {
        self.spec.pairs().into_iter().map(|p| (p.i, p.j, p.distance)).collect()
    }

    /// Hamiltonian terms as `(string, coefficient)`.
    fn hamiltonian(&self) -> PyResult<Vec<(String, f64)>> {
        let h = self.spec.build_hamiltonian().map_err(to_py)?;
        Ok(h.terms().map(|(s, c)| (s.to_string(), c)).collect())
    }

    fn num_params(&self, layers: usize) -> PyResult<usize> {
        Ok(ansatz::build_ansatz(&self.spec, layers).map_err(to_py)?.num_params())
    }

    fn describe_ansatz(&self, layers: usize) -> PyResult<String> {
        Ok(ansatz::build_ansatz(&self.spec, layers).map_err(to_py)?.describe())
    }

    /// Exact thermodynamics at each `K`.
    fn exact_curve(&self, k_grid: Vec<f64>) -> PyResult<Vec<PyThermoPoint>> {
        let curve = ed::reference_curve(&self.spec, &k_grid).map_err(to_py)?;
        Ok(curve.into_iter().map(Into::into).collect())
    }

    /// Thermodynamics of the normalized `e^{-τH}|+…+>` at `τ = K / (2J)`.
    fn imaginary_time_point(&self, k: f64) -> PyResult<PyThermoPoint> {
        let obs = self.spec.build_observables().map_err(to_py)?;
        let tau = k / (2.0 * self.spec.coupling);
        let state = statevector::exact_qite_state(&obs.energy, tau).map_err(to_py)?;
        let beta = k / self.spec.coupling;
        let p = thermo::measure_thermal_point(&state, &obs, beta, self.spec.coupling, self.spec.num_qubits())
            .map_err(to_py)?;
        Ok(p.into())
    }

    /// Variational evolution recorded every `record_stride` steps.
    #[pyo3(signature = (layers = 2, dtau = 0.002, k_max = 1.0, rcond = 1e-8, record_stride = 5))]
    fn evolve(
        &self,
        py: Python<'_>,
        layers: usize,
        dtau: f64,
        k_max: f64,
        rcond: f64,
        record_stride: usize,
    ) -> PyResult<Vec<PyThermoPoint>> {
        let a = ansatz::build_ansatz(&self.spec, layers).map_err(to_py)?;
        let config = EvolverConfig {
            dtau,
            tau_max: k_max / (2.0 * self.spec.coupling),
            rcond,
            record_stride,
            ..EvolverConfig::default()
        };
        let spec = self.spec.clone();
        let trace = py.detach(move || evolver::evolve(&a, &spec, &config)).map_err(to_py)?;
        Ok(trace.thermo.into_iter().map(Into::into).collect())
    }

    /// Fitted measurement circuit as layers of `(string, angle)`.
    #[pyo3(signature = (tau, dtau, widened_radius = None))]
    fn measure_circuit(&self, tau: f64, dtau: f64, widened_radius: Option<usize>) -> PyResult<Vec<Vec<(String, f64)>>> {
        let pool = widened_radius.map_or(PoolChoice::Bond, PoolChoice::Widened);
        let c = measure::build_measure_circuit(&self.spec, tau, dtau, pool).map_err(to_py)?;
        Ok(c.layers
            .iter()
            .map(|l| l.iter().map(|r| (r.string.to_string(), r.angle)).collect())
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "IsingModel(dims={}, alpha={}, coupling={})",
            self.spec.lattice, self.spec.range, self.spec.coupling
        )
    }
}

fn config_for(model: &PyIsingModel, layers: usize, dtau: f64, k_max: f64, rcond: f64, grid_step: f64) -> ExperimentConfig {
    ExperimentConfig {
        lattice: model.spec.lattice.clone(),
        range: model.spec.range,
        coupling: model.spec.coupling,
        layers,
        dtau,
        k_max,
        rcond,
        grid_step,
        ..ExperimentConfig::default()
    }
}

/// Variational and exact curves on the same grid: `(qite, exact)`.
#[pyfunction]
#[pyo3(signature = (model, layers = 2, dtau = 0.002, k_max = 1.0, rcond = 1e-8, grid_step = 0.02))]
fn sweep(
    py: Python<'_>,
    model: &PyIsingModel,
    layers: usize,
    dtau: f64,
    k_max: f64,
    rcond: f64,
    grid_step: f64,
) -> PyResult<(Vec<PyThermoPoint>, Vec<PyThermoPoint>)> {
    let config = config_for(model, layers, dtau, k_max, rcond, grid_step);
    let result = py.detach(move || experiments::sweep(&config)).map_err(to_py)?;
    Ok((
        result.qite_curve().into_iter().map(Into::into).collect(),
        result.exact_curve().into_iter().map(Into::into).collect(),
    ))
}

/// `[(L, mean |ΔCv|)]` over the sweep grid.
#[pyfunction]
#[pyo3(signature = (model, layer_list, dtau = 0.002, k_max = 1.0, rcond = 1e-8, grid_step = 0.02))]
fn layer_scan(
    py: Python<'_>,
    model: &PyIsingModel,
    layer_list: Vec<usize>,
    dtau: f64,
    k_max: f64,
    rcond: f64,
    grid_step: f64,
) -> PyResult<Vec<(usize, f64)>> {
    let config = config_for(model, 1, dtau, k_max, rcond, grid_step);
    py.detach(move || experiments::layer_scan(&config, &layer_list)).map_err(to_py)
}

/// `(K_peak, Cv_peak, at_boundary)` of a curve.
#[pyfunction]
fn peak_locate(curve: Vec<PyRef<'_, PyThermoPoint>>) -> PyResult<(f64, f64, bool)> {
    let points: Vec<thermo::ThermoPoint> = curve
        .iter()
        .map(|p| thermo::ThermoPoint {
            k: p.k,
            energy: p.energy,
            energy_sq: p.energy_sq,
            magnetization: p.magnetization,
            magnetization_sq: p.magnetization_sq,
            cv: p.cv,
            chi: p.chi,
        })
        .collect();
    let p = experiments::peak_locate(&points).map_err(to_py)?;
    Ok((p.k, p.cv, p.at_boundary))
}

/// `{quantity: (D exponent, N_d exponent, value)}` for `mode` "full" or "dual".
#[pyfunction]
#[pyo3(signature = (dimension, side, mode = "full"))]
fn cost_estimate(dimension: usize, side: usize, mode: &str) -> PyResult<Vec<(String, u32, u32, f64)>> {
    let mode: CostMode = mode.parse().map_err(to_py)?;
    let c = experiments::cost_estimate(dimension, side, mode).map_err(to_py)?;
    Ok([("steps", c.steps), ("expectations", c.expectations), ("gates", c.gates), ("time", c.time)]
        .into_iter()
        .map(|(n, o)| (n.to_string(), o.d_exponent, o.side_exponent, o.value))
        .collect())
}

#[pyfunction]
fn thermo_from_expectations(
    energy: f64,
    energy_sq: f64,
    magnetization: f64,
    magnetization_sq: f64,
    beta: f64,
    coupling: f64,
    volume: usize,
) -> PyThermoPoint {
    thermo::thermo_from_expectations(energy, energy_sq, magnetization, magnetization_sq, beta, coupling, volume).into()
}

#[pymodule]
fn ising_qite_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyThermoPoint>()?;
    m.add_class::<PyIsingModel>()?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(layer_scan, m)?)?;
    m.add_function(wrap_pyfunction!(peak_locate, m)?)?;
    m.add_function(wrap_pyfunction!(cost_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(thermo_from_expectations, m)?)?;
    Ok(())
}

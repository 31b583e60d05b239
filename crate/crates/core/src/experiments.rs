//! Experiment drivers behind the command-line tool: temperature sweeps,
//! layer scans, interaction-range scans, peak location and the
//! execution-cost model. Results are plain CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::ansatz::build_ansatz;
use crate::ed::reference_curve;
use crate::error::{invalid, Error, Result};
use crate::evolver::{evolve, EvolutionTrace, EvolverConfig};
use crate::ising::{InteractionRange, IsingSpec};
use crate::lattice::Lattice;
use crate::thermo::ThermoPoint;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lattice: Lattice,
    pub range: InteractionRange,
    pub coupling: f64,
    pub layers: usize,
    pub dtau: f64,
    pub k_max: f64,
    pub rcond: f64,
    /// Spacing of the recorded `K` grid; a multiple of `2 J dtau`.
    pub grid_step: f64,
    pub residual: bool,
    pub out: Option<PathBuf>,
    pub layer_list: Vec<usize>,
    pub alphas: Vec<InteractionRange>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lattice: Lattice::new(vec![3, 3]).unwrap(),
            range: InteractionRange::Infinite,
            coupling: 1.0,
            layers: 2,
            dtau: 0.002,
            k_max: 1.0,
            rcond: 1e-8,
            grid_step: 0.02,
            residual: false,
            out: None,
            layer_list: vec![1, 2, 3, 4],
            alphas: vec![
                InteractionRange::Finite(1.0),
                InteractionRange::Finite(2.0),
                InteractionRange::Finite(3.0),
                InteractionRange::Infinite,
            ],
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad value '{value}' for '{key}'")))
}

fn parse_list<T>(key: &str, value: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| f(s.trim()))
        .collect::<Result<Vec<_>>>()?;
    if items.is_empty() {
        return invalid(format!("empty list for '{key}'"));
    }
    Ok(items)
}

impl ExperimentConfig {
    /// Sets one option by name; names match the long CLI flags, with `-`
    /// and `_` interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "dims" => self.lattice = value.parse()?,
            "alpha" => self.range = value.parse()?,
            "coupling" => self.coupling = parse_num(&key, value)?,
            "layers" => self.layers = parse_num(&key, value)?,
            "dtau" => self.dtau = parse_num(&key, value)?,
            "kmax" => self.k_max = parse_num(&key, value)?,
            "rcond" => self.rcond = parse_num(&key, value)?,
            "grid-step" => self.grid_step = parse_num(&key, value)?,
            "residual" => self.residual = parse_num(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "layer-list" => self.layer_list = parse_list(&key, value, |s| parse_num(&key, s))?,
            "alphas" => self.alphas = parse_list(&key, value, |s| s.parse())?,
            _ => return invalid(format!("unknown option '{key}'")),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("config line {}: expected 'key = value'", lineno + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_kv_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_kv_text(&text)
    }

    pub fn spec(&self) -> Result<IsingSpec> {
        IsingSpec::new(self.lattice.clone(), self.coupling, self.range)
    }

    /// Euler steps between recorded grid points.
    pub fn record_stride(&self) -> Result<usize> {
        let per_step = 2.0 * self.coupling * self.dtau;
        let ratio = self.grid_step / per_step;
        let stride = ratio.round();
        if !(stride >= 1.0) || (ratio - stride).abs() > 1e-9 * ratio.max(1.0) {
            return invalid(format!(
                "grid step {} is not a positive multiple of 2*J*dtau = {per_step}",
                self.grid_step
            ));
        }
        Ok(stride as usize)
    }

    pub fn evolver_config(&self) -> Result<EvolverConfig> {
        let config = EvolverConfig {
            dtau: self.dtau,
            tau_max: self.k_max / (2.0 * self.coupling),
            rcond: self.rcond,
            record_stride: self.record_stride()?,
            compute_residual: self.residual,
            ..EvolverConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

/// One `K` grid point with the variational and exact values side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub qite: ThermoPoint,
    pub exact: ThermoPoint,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub trace: EvolutionTrace,
}

impl SweepResult {
    pub fn qite_curve(&self) -> Vec<ThermoPoint> {
        self.rows.iter().map(|r| r.qite).collect()
    }

    pub fn exact_curve(&self) -> Vec<ThermoPoint> {
        self.rows.iter().map(|r| r.exact).collect()
    }

    pub fn max_cv_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.qite.cv - r.exact.cv).abs()).fold(0.0, f64::max)
    }

    pub fn max_chi_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.qite.chi - r.exact.chi).abs()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "tau,K,E,E2,M,M2,Cv,chi,residual,E_ed,E2_ed,M_ed,M2_ed,Cv_ed,chi_ed\n",
        );
        for r in &self.rows {
            let q = &r.qite;
            let e = &r.exact;
            let residual = r.residual.map(fmt_sig).unwrap_or_default();
            let fields = [
                fmt_sig(r.tau),
                fmt_sig(q.k),
                fmt_sig(q.energy),
                fmt_sig(q.energy_sq),
                fmt_sig(q.magnetization),
                fmt_sig(q.magnetization_sq),
                fmt_sig(q.cv),
                fmt_sig(q.chi),
                residual,
                fmt_sig(e.energy),
                fmt_sig(e.energy_sq),
                fmt_sig(e.magnetization),
                fmt_sig(e.magnetization_sq),
                fmt_sig(e.cv),
                fmt_sig(e.chi),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// Variational run recorded on the `K` grid, paired with the exact curve on
/// the same grid.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    let spec = config.spec()?;
    let evolver_config = config.evolver_config()?;
    let ansatz = build_ansatz(&spec, config.layers)?;
    let trace = evolve(&ansatz, &spec, &evolver_config)?;
    let grid: Vec<f64> = trace.thermo.iter().map(|p| p.k).collect();
    let exact = reference_curve(&spec, &grid)?;
    let rows = trace
        .taus
        .iter()
        .zip(&trace.thermo)
        .zip(&exact)
        .zip(&trace.residuals)
        .map(|(((&tau, &qite), &exact), &residual)| SweepRow {
            tau,
            qite,
            exact,
            residual,
        })
        .collect();
    Ok(SweepResult { rows, trace })
}

/// Trapezoidal mean of `|Cv − Cv_ref|` over the shared `K` grid.
pub fn mean_abs_cv_error(curve: &[ThermoPoint], reference: &[ThermoPoint]) -> Result<f64> {
    if curve.len() != reference.len() || curve.len() < 2 {
        return invalid("curves need the same grid with at least two points");
    }
    if curve.iter().zip(reference).any(|(a, b)| (a.k - b.k).abs() > 1e-9) {
        return invalid("curves are on different K grids");
    }
    let mut integral = 0.0;
    for w in 0..curve.len() - 1 {
        let d0 = (curve[w].cv - reference[w].cv).abs();
        let d1 = (curve[w + 1].cv - reference[w + 1].cv).abs();
        integral += 0.5 * (d0 + d1) * (curve[w + 1].k - curve[w].k);
    }
    let span = (curve[curve.len() - 1].k - curve[0].k).abs();
    Ok(integral / span)
}

/// `(L, ΔC̄_v)` for every layer count. Runs are independent and execute in
/// parallel.
pub fn layer_scan(config: &ExperimentConfig, layer_list: &[usize]) -> Result<Vec<(usize, f64)>> {
    if layer_list.iter().any(|&l| l < 1) {
        return invalid("layer counts must be at least 1");
    }
    layer_list
        .par_iter()
        .map(|&layers| {
            let c = ExperimentConfig {
                layers,
                ..config.clone()
            };
            let s = sweep(&c)?;
            Ok((layers, mean_abs_cv_error(&s.qite_curve(), &s.exact_curve())?))
        })
        .collect()
}

pub fn layer_scan_csv(rows: &[(usize, f64)]) -> String {
    let mut out = String::from("L,dCv\n");
    for (l, e) in rows {
        let _ = writeln!(out, "{l},{}", fmt_sig(*e));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakEstimate {
    pub k: f64,
    pub cv: f64,
    /// The maximum sits on the first or last grid point; `k` is the raw
    /// argmax.
    pub at_boundary: bool,
}

/// Specific-heat maximum refined by a parabola through the largest sample
/// and its two neighbours.
pub fn peak_locate(curve: &[ThermoPoint]) -> Result<PeakEstimate> {
    if curve.len() < 5 {
        return invalid("peak location needs at least five points");
    }
    let (idx, top) = curve
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, p)| if p.cv > bv { (i, p.cv) } else { (bi, bv) });
    if idx == 0 || idx == curve.len() - 1 {
        return Ok(PeakEstimate {
            k: curve[idx].k,
            cv: top,
            at_boundary: true,
        });
    }
    let (x0, x1, x2) = (curve[idx - 1].k, curve[idx].k, curve[idx + 1].k);
    let (y0, y1, y2) = (curve[idx - 1].cv, curve[idx].cv, curve[idx + 1].cv);
    // vertex of the interpolating parabola
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return Ok(PeakEstimate {
            k: x1,
            cv: y1,
            at_boundary: false,
        });
    }
    let k = x1 - 0.5 * num / den;
    // value of the parabola at its vertex (Lagrange form)
    let l0 = (k - x1) * (k - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (k - x0) * (k - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (k - x0) * (k - x1) / ((x2 - x0) * (x2 - x1));
    Ok(PeakEstimate {
        k,
        cv: y0 * l0 + y1 * l1 + y2 * l2,
        at_boundary: false,
    })
}

/// Uniform grid `0, step, …` up to and including `k_max`.
pub fn k_grid(k_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(k_max >= 0.0) {
        return invalid("K grid needs a positive step and non-negative maximum");
    }
    let n = (k_max / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| i as f64 * step).collect())
}

/// Exact specific-heat peak of a model on a uniform `K` grid.
pub fn exact_peak(spec: &IsingSpec, k_max: f64, step: f64) -> Result<PeakEstimate> {
    peak_locate(&reference_curve(spec, &k_grid(k_max, step)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostMode {
    Full,
    /// Linear-in-`N` expectation count.
    Dual,
}

impl std::str::FromStr for CostMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(CostMode::Full),
            "dual" => Ok(CostMode::Dual),
            _ => invalid(format!("unknown cost mode '{s}'")),
        }
    }
}

/// An order of magnitude `D^a N_d^b` with its exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order {
    pub d_exponent: u32,
    pub side_exponent: u32,
    pub value: f64,
}

impl Order {
    fn new(dimension: usize, side: usize, d_exponent: u32, side_exponent: u32) -> Self {
        Self {
            d_exponent,
            side_exponent,
            value: (dimension as f64).powi(d_exponent as i32) * (side as f64).powi(side_exponent as i32),
        }
    }
}

/// Orders of the nearest-neighbour execution cost in arbitrary units:
/// `time ~ steps × expectations × gates`, with `N ~ D² N_d^{D+1}` and
/// `L ~ D N_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub steps: Order,
    pub expectations: Order,
    pub gates: Order,
    pub time: Order,
}

pub fn cost_estimate(dimension: usize, side: usize, mode: CostMode) -> Result<CostEstimate> {
    if dimension == 0 || side == 0 {
        return invalid("cost estimate needs positive dimension and side length");
    }
    let d = dimension as u32;
    let params = (2, d + 1);
    let expectations = match mode {
        CostMode::Full => (2 * params.0, 2 * params.1),
        CostMode::Dual => params,
    };
    let time = (expectations.0 + params.0, expectations.1 + params.1);
    Ok(CostEstimate {
        steps: Order::new(dimension, side, 0, 0),
        expectations: Order::new(dimension, side, expectations.0, expectations.1),
        gates: Order::new(dimension, side, params.0, params.1),
        time: Order::new(dimension, side, time.0, time.1),
    })
}

pub fn cost_csv(dimension: usize, side: usize, mode: CostMode, c: &CostEstimate) -> String {
    let mut out = String::from("D,N_d,mode,quantity,D_exp,N_d_exp,value\n");
    let mode = match mode {
        CostMode::Full => "full",
        CostMode::Dual => "dual",
    };
    for (name, o) in [
        ("steps", c.steps),
        ("expectations", c.expectations),
        ("gates", c.gates),
        ("time", c.time),
    ] {
        let _ = writeln!(
            out,
            "{dimension},{side},{mode},{name},{},{},{}",
            o.d_exponent,
            o.side_exponent,
            fmt_sig(o.value)
        );
    }
    out
}

/// Formats with 12 significant digits, fixed-point for moderate magnitudes
/// and scientific otherwise.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

/// A gnuplot script plotting columns of a sweep CSV against `K`.
pub fn gnuplot_script(csv: &Path, title: &str) -> String {
    let f = csv.display();
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'K'\n\
         set multiplot layout 1,2 title '{title}'\n\
         set ylabel 'C_v'\n\
         plot '{f}' using 2:7 with points, '' using 2:14 with lines\n\
         set ylabel 'chi'\n\
         plot '{f}' using 2:8 with points, '' using 2:15 with lines\n\
         unset multiplot\n"
    )
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ising_qite::experiments::{
    self, cost_csv, cost_estimate, exact_peak, gnuplot_script, layer_scan, layer_scan_csv, peak_locate, sweep,
    CostMode, ExperimentConfig,
};
use ising_qite::Error;

#[derive(Parser)]
#[command(name = "ising-qite", version, about = "Thermal states of the long-range Ising model by variational imaginary-time evolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variational and exact thermodynamics on a K grid
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Also write a gnuplot script next to the CSV
        #[arg(long)]
        gnuplot: bool,
    },
    /// Mean specific-heat error against the number of layers
    Layers {
        #[command(flatten)]
        common: Common,
        /// Comma-separated layer counts
        #[arg(long = "layer-list")]
        layer_list: Option<String>,
    },
    /// Sweeps over several interaction ranges
    AlphaScan {
        #[command(flatten)]
        common: Common,
        /// Comma-separated exponents; "inf" is nearest-neighbour
        #[arg(long)]
        alphas: Option<String>,
    },
    /// Location of the specific-heat maximum
    Peak {
        #[command(flatten)]
        common: Common,
        /// Locate the peak of the variational curve as well
        #[arg(long)]
        qite: bool,
    },
    /// Order-of-magnitude execution cost for a hypercubic lattice
    Cost {
        #[arg(long, default_value_t = 2)]
        dimension: usize,
        #[arg(long, default_value_t = 3)]
        side: usize,
        /// full or dual
        #[arg(long, default_value = "full")]
        mode: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// key = value file; flags given on the command line take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lattice side lengths, e.g. 3x3
    #[arg(long)]
    dims: Option<String>,
    /// Interaction exponent, or "inf" for nearest-neighbour
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    coupling: Option<f64>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    dtau: Option<f64>,
    #[arg(long)]
    kmax: Option<f64>,
    #[arg(long)]
    rcond: Option<f64>,
    #[arg(long = "grid-step")]
    grid_step: Option<f64>,
    /// Record the McLachlan residual at each grid point
    #[arg(long)]
    residual: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self, extra: &[(&str, Option<&String>)]) -> Result<ExperimentConfig, Error> {
        let mut c = ExperimentConfig::default();
        if let Some(path) = &self.config {
            c.apply_kv_file(path)?;
        }
        let owned = [
            ("dims", self.dims.clone()),
            ("alpha", self.alpha.clone()),
            ("coupling", self.coupling.map(|v| v.to_string())),
            ("layers", self.layers.map(|v| v.to_string())),
            ("dtau", self.dtau.map(|v| v.to_string())),
            ("kmax", self.kmax.map(|v| v.to_string())),
            ("rcond", self.rcond.map(|v| v.to_string())),
            ("grid-step", self.grid_step.map(|v| v.to_string())),
        ];
        for (k, v) in &owned {
            if let Some(v) = v {
                c.set(k, v)?;
            }
        }
        for (k, v) in extra {
            if let Some(v) = v {
                c.set(k, v)?;
            }
        }
        if self.residual {
            c.residual = true;
        }
        if let Some(out) = &self.out {
            c.out = Some(out.clone());
        }
        Ok(c)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Sweep { common, gnuplot } => {
            let c = common.resolve(&[])?;
            let result = sweep(&c)?;
            emit(c.out.as_deref(), &result.to_csv())?;
            if gnuplot {
                let Some(out) = &c.out else {
                    return Err(Error::InvalidInput("--gnuplot needs --out".into()));
                };
                let title = format!("{} alpha={}", c.lattice, c.range);
                std::fs::write(out.with_extension("gp"), gnuplot_script(out, &title))?;
            }
            eprintln!(
                "max |dCv| = {}, max |dchi| = {}",
                experiments::fmt_sig(result.max_cv_error()),
                experiments::fmt_sig(result.max_chi_error())
            );
        }
        Command::Layers { common, layer_list } => {
            let c = common.resolve(&[("layer-list", layer_list.as_ref())])?;
            let rows = layer_scan(&c, &c.layer_list)?;
            emit(c.out.as_deref(), &layer_scan_csv(&rows))?;
        }
        Command::AlphaScan { common, alphas } => {
            let c = common.resolve(&[("alphas", alphas.as_ref())])?;
            let mut csv = String::from("alpha,K,Cv,chi,Cv_ed,chi_ed\n");
            for &range in &c.alphas {
                let run = ExperimentConfig { range, ..c.clone() };
                let result = sweep(&run)?;
                for r in &result.rows {
                    csv.push_str(&format!(
                        "{range},{},{},{},{},{}\n",
                        experiments::fmt_sig(r.qite.k),
                        experiments::fmt_sig(r.qite.cv),
                        experiments::fmt_sig(r.qite.chi),
                        experiments::fmt_sig(r.exact.cv),
                        experiments::fmt_sig(r.exact.chi)
                    ));
                }
                let peak = peak_locate(&result.exact_curve())?;
                eprintln!("alpha={range}: exact K_peak = {}", experiments::fmt_sig(peak.k));
            }
            emit(c.out.as_deref(), &csv)?;
        }
        Command::Peak { common, qite } => {
            let c = common.resolve(&[])?;
            let mut csv = String::from("source,K_peak,Cv_peak,at_boundary\n");
            let exact = exact_peak(&c.spec()?, c.k_max, c.grid_step)?;
            let mut peaks = vec![("exact", exact)];
            if qite {
                peaks.push(("qite", peak_locate(&sweep(&c)?.qite_curve())?));
            }
            for (name, p) in peaks {
                csv.push_str(&format!(
                    "{name},{},{},{}\n",
                    experiments::fmt_sig(p.k),
                    experiments::fmt_sig(p.cv),
                    p.at_boundary
                ));
            }
            emit(c.out.as_deref(), &csv)?;
        }
        Command::Cost {
            dimension,
            side,
            mode,
            out,
        } => {
            let mode: CostMode = mode.parse()?;
            let estimate = cost_estimate(dimension, side, mode)?;
            emit(out.as_deref(), &cost_csv(dimension, side, mode, &estimate))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidInput(_) => 2,
                Error::Resource(_) => 3,
                Error::Numerical(_) => 4,
                Error::Io(_) => 1,
            })
        }
    }
}

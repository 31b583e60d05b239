//! The long-range Ising Hamiltonian and the four diagonal observables
//! needed for the specific heat and susceptibility.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::lattice::{Lattice, Pair, PairMode};
use crate::pauli::{Pauli, PauliString, WeightedPauliSum};

/// Interaction range exponent `α` in `J / r^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InteractionRange {
    Finite(f64),
    /// Nearest-neighbour model: only `r_ij = 1` bonds.
    Infinite,
}

impl InteractionRange {
    pub fn pair_mode(self) -> PairMode {
        match self {
            InteractionRange::Finite(_) => PairMode::AllPairs,
            InteractionRange::Infinite => PairMode::NearestNeighbor,
        }
    }
}

impl fmt::Display for InteractionRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InteractionRange::Finite(a) => write!(f, "{a}"),
            InteractionRange::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for InteractionRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "inf" | "infinity" | "∞") {
            return Ok(InteractionRange::Infinite);
        }
        let a: f64 = t
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad interaction range '{s}'")))?;
        if a.is_infinite() && a > 0.0 {
            return Ok(InteractionRange::Infinite);
        }
        Ok(InteractionRange::Finite(a))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingSpec {
    pub lattice: Lattice,
    pub coupling: f64,
    pub range: InteractionRange,
    pub field: f64,
}

/// `H`, `H²`, `Z_tot` and `Z_tot²` as canonical Z-string sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub energy: WeightedPauliSum,
    pub energy_sq: WeightedPauliSum,
    pub magnetization: WeightedPauliSum,
    pub magnetization_sq: WeightedPauliSum,
}

impl IsingSpec {
    /// Zero-field spec with coupling `J`.
    pub fn new(lattice: Lattice, coupling: f64, range: InteractionRange) -> Result<Self> {
        let spec = Self {
            lattice,
            coupling,
            range,
            field: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let InteractionRange::Finite(a) = self.range {
            if !(a > 0.0) || !a.is_finite() {
                return invalid(format!("interaction range must be positive, got {a}"));
            }
        }
        if !(self.coupling > 0.0) || !self.coupling.is_finite() {
            return invalid(format!("coupling must be positive, got {}", self.coupling));
        }
        if !self.field.is_finite() {
            return invalid("field must be finite");
        }
        if self.lattice.volume() < 2 {
            return invalid("Ising model needs at least two sites");
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.lattice.volume()
    }

    /// Bonds present in the Hamiltonian, in canonical order.
    pub fn pairs(&self) -> Vec<Pair> {
        self.lattice.enumerate_pairs(self.range.pair_mode())
    }

    pub fn bond_strength(&self, distance: usize) -> f64 {
        match self.range {
            InteractionRange::Finite(a) => self.coupling / (distance as f64).powf(a),
            InteractionRange::Infinite => self.coupling,
        }
    }

    pub fn build_hamiltonian(&self) -> Result<WeightedPauliSum> {
        self.validate()?;
        let n = self.num_qubits();
        let mut h = WeightedPauliSum::zero(n);
        for p in self.pairs() {
            let zz = PauliString::from_sparse(n, &[(p.i, Pauli::Z), (p.j, Pauli::Z)])?;
            h.add_term(zz, -self.bond_strength(p.distance))?;
        }
        if self.field != 0.0 {
            for q in 0..n {
                h.add_term(PauliString::from_sparse(n, &[(q, Pauli::Z)])?, -self.field)?;
            }
        }
        h.canonicalize();
        Ok(h)
    }

    pub fn build_observables(&self) -> Result<Observables> {
        let n = self.num_qubits();
        let energy = self.build_hamiltonian()?;
        let energy_sq = energy.multiply(&energy)?;
        let magnetization = WeightedPauliSum::from_terms(
            n,
            (0..n).map(|q| (PauliString::from_sparse(n, &[(q, Pauli::Z)]).unwrap(), 1.0)),
        )?;
        let magnetization_sq = magnetization.multiply(&magnetization)?;
        Ok(Observables {
            energy,
            energy_sq,
            magnetization,
            magnetization_sq,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dims: &str, range: InteractionRange) -> IsingSpec {
        IsingSpec::new(dims.parse().unwrap(), 1.0, range).unwrap()
    }

    #[test]
    fn two_qubit_hamiltonian() {
        let h = spec("2", InteractionRange::Infinite).build_hamiltonian().unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.coefficient(&PauliString::parse(2, "Z1Z0").unwrap()), -1.0);
    }

    #[test]
    fn nearest_neighbour_3x3() {
        let h = spec("3x3", InteractionRange::Infinite).build_hamiltonian().unwrap();
        assert_eq!(h.len(), 18);
        assert!(h.terms().all(|(_, c)| c == -1.0));
    }

    #[test]
    fn long_range_3x3() {
        let s = spec("3x3", InteractionRange::Finite(2.0));
        let h = s.build_hamiltonian().unwrap();
        assert_eq!(h.len(), 36);
        // sites 0 and 8 sit at distance 2
        let zz = PauliString::parse(9, "Z8Z0").unwrap();
        assert_eq!(h.coefficient(&zz), -0.25);
    }

    #[test]
    fn observables_two_qubit() {
        let o = spec("2", InteractionRange::Infinite).build_observables().unwrap();
        assert_eq!(o.energy_sq.len(), 1);
        assert_eq!(o.energy_sq.coefficient(&PauliString::identity(2)), 1.0);
        assert_eq!(o.magnetization_sq.coefficient(&PauliString::identity(2)), 2.0);
        assert_eq!(
            o.magnetization_sq.coefficient(&PauliString::parse(2, "Z1Z0").unwrap()),
            2.0
        );
    }

    #[test]
    fn observables_2x2() {
        let o = spec("2x2", InteractionRange::Infinite).build_observables().unwrap();
        let id = PauliString::identity(4);
        assert_eq!(o.magnetization_sq.coefficient(&id), 4.0);
        let two_body: Vec<f64> = o
            .magnetization_sq
            .terms()
            .filter(|(s, _)| !s.is_identity())
            .map(|(_, c)| c)
            .collect();
        assert_eq!(two_body, vec![2.0; 6]);
    }

    #[test]
    fn rejects_bad_specs() {
        let l: Lattice = "3x3".parse().unwrap();
        assert!(IsingSpec::new(l.clone(), 1.0, InteractionRange::Finite(0.0)).is_err());
        assert!(IsingSpec::new(l.clone(), 1.0, InteractionRange::Finite(-1.0)).is_err());
        assert!(IsingSpec::new(l, -1.0, InteractionRange::Infinite).is_err());
        assert!(IsingSpec::new(Lattice::chain(1).unwrap(), 1.0, InteractionRange::Infinite).is_err());
    }

    #[test]
    fn range_parsing() {
        assert_eq!("inf".parse::<InteractionRange>().unwrap(), InteractionRange::Infinite);
        assert_eq!("2".parse::<InteractionRange>().unwrap(), InteractionRange::Finite(2.0));
        assert!("abc".parse::<InteractionRange>().is_err());
    }
}

//! Pauli strings and real-weighted sums of them.
//!
//! Letters are stored densely, `letters[q]` acting on qubit `q`. Text
//! rendering lists the non-identity letters from the highest qubit down,
//! e.g. `Z1Y0`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Coefficients with magnitude below this are dropped on canonicalization.
pub const COEFF_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Single-qubit product `a·b = i^k · c`, returned as `(k, c)`.
    fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }
}

/// A unit phase `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);

    pub fn from_power(k: u8) -> Self {
        Phase(k % 4)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    /// `+1` or `-1` for real phases.
    pub fn real_sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_power(self.0 + rhs.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Self {
        Self {
            letters: vec![Pauli::I; num_qubits],
        }
    }

    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    /// Builds a string from `(qubit, letter)` pairs, identity elsewhere.
    pub fn from_sparse(num_qubits: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(num_qubits);
        for &(q, p) in ops {
            if q >= num_qubits {
                return invalid(format!("qubit {q} out of range for {num_qubits} qubits"));
            }
            s.letters[q] = p;
        }
        Ok(s)
    }

    /// Parses the compact form, e.g. `"Z1Y0"` or `"Z2I1Y0"`. `"I"` is the
    /// identity.
    pub fn parse(num_qubits: usize, text: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad Pauli string '{text}'"));
        let mut s = Self::identity(num_qubits);
        if text == "I" {
            return Ok(s);
        }
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            let p = Pauli::from_char(c).ok_or_else(bad)?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let q: usize = digits.parse().map_err(|_| bad())?;
            if q >= num_qubits {
                return Err(bad());
            }
            s.letters[q] = p;
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// True when every letter is `I` or `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.letters.iter().all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }

    pub fn y_count(&self) -> usize {
        self.letters.iter().filter(|&&p| p == Pauli::Y).count()
    }

    /// True for an odd number of `Y` letters.
    pub fn y_parity_odd(&self) -> bool {
        self.y_count() % 2 == 1
    }

    /// Bit masks `(x, z)` with `Y` setting both. Only valid for up to 64
    /// qubits.
    pub fn masks(&self) -> (u64, u64) {
        let mut x = 0u64;
        let mut z = 0u64;
        for (q, &p) in self.letters.iter().enumerate() {
            match p {
                Pauli::X => x |= 1 << q,
                Pauli::Z => z |= 1 << q,
                Pauli::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                Pauli::I => {}
            }
        }
        (x, z)
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.letters.len() != other.letters.len() {
            return invalid(format!(
                "Pauli string length mismatch: {} vs {}",
                self.letters.len(),
                other.letters.len()
            ));
        }
        Ok(())
    }

    /// `self · other = phase · product`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        self.check_len(other)?;
        let mut k = 0u8;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (dk, c) = a.mul(b);
                k += dk;
                c
            })
            .collect();
        Ok((Phase::from_power(k), PauliString { letters }))
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        let clashes = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        Ok(clashes % 2 == 0)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("I");
        }
        for (q, &p) in self.letters.iter().enumerate().rev() {
            if p != Pauli::I {
                write!(f, "{}{}", p.as_char(), q)?;
            }
        }
        Ok(())
    }
}

/// A real linear combination of Pauli strings on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPauliSum {
    num_qubits: usize,
    terms: BTreeMap<PauliString, f64>,
}

impl WeightedPauliSum {
    pub fn zero(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        num_qubits: usize,
        terms: impl IntoIterator<Item = (PauliString, f64)>,
    ) -> Result<Self> {
        let mut sum = Self::zero(num_qubits);
        for (s, c) in terms {
            sum.add_term(s, c)?;
        }
        sum.canonicalize();
        Ok(sum)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.terms.iter().map(|(s, &c)| (s, c))
    }

    pub fn coefficient(&self, s: &PauliString) -> f64 {
        self.terms.get(s).copied().unwrap_or(0.0)
    }

    /// Adds `coeff · s`, merging with an existing term. Does not
    /// canonicalize.
    pub fn add_term(&mut self, s: PauliString, coeff: f64) -> Result<()> {
        if s.num_qubits() != self.num_qubits {
            return invalid(format!(
                "term on {} qubits added to sum on {}",
                s.num_qubits(),
                self.num_qubits
            ));
        }
        if !coeff.is_finite() {
            return invalid("non-finite coefficient");
        }
        *self.terms.entry(s).or_insert(0.0) += coeff;
        Ok(())
    }

    pub fn canonicalize(&mut self) {
        self.terms.retain(|_, c| c.abs() >= COEFF_EPS);
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(PauliString::is_diagonal)
    }

    /// Sum of absolute coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// Product of two diagonal (I/Z) sums.
    pub fn multiply(&self, other: &WeightedPauliSum) -> Result<WeightedPauliSum> {
        if self.num_qubits != other.num_qubits {
            return invalid("Pauli sums on different qubit counts");
        }
        if !self.is_diagonal() || !other.is_diagonal() {
            return invalid("multiply_sums only accepts I/Z sums");
        }
        let mut out = WeightedPauliSum::zero(self.num_qubits);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (phase, s) = a.multiply(b)?;
                let sign = phase.real_sign().ok_or_else(|| {
                    Error::InvalidInput(format!("product {a}·{b} has a non-real phase"))
                })?;
                *out.terms.entry(s).or_insert(0.0) += sign * ca * cb;
            }
        }
        out.canonicalize();
        Ok(out)
    }

    /// Diagonal of a diagonal sum in the computational basis, indexed by
    /// basis state with qubit 0 least significant.
    pub fn diagonal_values(&self) -> Result<Vec<f64>> {
        if !self.is_diagonal() {
            return invalid("diagonal_values on a non-diagonal sum");
        }
        let dim = 1usize << self.num_qubits;
        let mut diag = vec![0.0; dim];
        for (s, &c) in &self.terms {
            let (_, z) = s.masks();
            for (b, d) in diag.iter_mut().enumerate() {
                if (b as u64 & z).count_ones() % 2 == 0 {
                    *d += c;
                } else {
                    *d -= c;
                }
            }
        }
        Ok(diag)
    }
}

impl fmt::Display for WeightedPauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(s, c)| format!("{c}*{s}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

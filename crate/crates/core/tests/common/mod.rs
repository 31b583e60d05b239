#![allow(dead_code)]

use ising_qite::pauli::{Pauli, PauliString, WeightedPauliSum};
use ising_qite::statevector::StateVector;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn single(p: Pauli) -> DMatrix<Complex64> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match p {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Kronecker product with qubit 0 as the rightmost factor.
pub fn dense(s: &PauliString) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for &p in s.letters().iter().rev() {
        m = m.kronecker(&single(p));
    }
    m
}

pub fn dense_sum(h: &WeightedPauliSum) -> DMatrix<Complex64> {
    let d = 1 << h.num_qubits();
    let mut m = DMatrix::zeros(d, d);
    for (s, w) in h.terms() {
        m += dense(s) * c(w, 0.0);
    }
    m
}

pub fn column(s: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn letter(k: u8) -> Pauli {
    [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][k as usize % 4]
}

pub fn string_from(codes: &[u8]) -> PauliString {
    PauliString::new(codes.iter().map(|&k| letter(k)).collect())
}

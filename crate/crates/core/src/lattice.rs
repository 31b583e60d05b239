//! Periodic hypercubic lattices with the wrap-around Manhattan metric.
//!
//! Sites are flattened row-major with the first dimension fastest, so on a
//! `N_1 x N_2` lattice the site at `(r_1, r_2)` has index `r_1 + N_1 * r_2`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    dims: Vec<usize>,
    volume: usize,
}

/// Which site pairs to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    AllPairs,
    NearestNeighbor,
}

/// An unordered site pair stored with `i > j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
    pub distance: usize,
}

impl Lattice {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return invalid("lattice needs at least one dimension");
        }
        if dims.iter().any(|&n| n == 0) {
            return invalid(format!("lattice side lengths must be positive, got {dims:?}"));
        }
        let volume = dims
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::InvalidInput("lattice volume overflows".into()))?;
        Ok(Self { dims, volume })
    }

    /// A periodic 1-D chain of `n` sites.
    pub fn chain(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    pub fn volume(&self) -> usize {
        self.volume
    }

    fn check_site(&self, index: usize) -> Result<()> {
        if index >= self.volume {
            return invalid(format!(
                "site index {index} out of range for lattice of volume {}",
                self.volume
            ));
        }
        Ok(())
    }

    pub fn site_to_coords(&self, index: usize) -> Result<Vec<usize>> {
        self.check_site(index)?;
        let mut rest = index;
        Ok(self
            .dims
            .iter()
            .map(|&n| {
                let c = rest % n;
                rest /= n;
                c
            })
            .collect())
    }

    pub fn coords_to_site(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dims.len() {
            return invalid(format!(
                "coordinate vector has {} entries, lattice has dimension {}",
                coords.len(),
                self.dims.len()
            ));
        }
        let mut index = 0;
        for (&c, &n) in coords.iter().zip(&self.dims).rev() {
            if c >= n {
                return invalid(format!("coordinate {c} out of range for side {n}"));
            }
            index = index * n + c;
        }
        Ok(index)
    }

    pub fn manhattan_distance_pbc(&self, i: usize, j: usize) -> Result<usize> {
        let a = self.site_to_coords(i)?;
        let b = self.site_to_coords(j)?;
        Ok(a.iter()
            .zip(&b)
            .zip(&self.dims)
            .map(|((&x, &y), &n)| {
                let d = x.abs_diff(y);
                d.min(n - d)
            })
            .sum())
    }

    /// Largest possible distance on this torus, `Σ_d ⌊N_d/2⌋`.
    pub fn max_distance(&self) -> usize {
        self.dims.iter().map(|n| n / 2).sum()
    }

    /// Unordered pairs `(i, j, r_ij)` with `i > j`, sorted by `(j, i)`.
    pub fn enumerate_pairs(&self, mode: PairMode) -> Vec<Pair> {
        let mut pairs = Vec::new();
        for j in 0..self.volume {
            for i in (j + 1)..self.volume {
                // indices are in range by construction
                let distance = self.manhattan_distance_pbc(i, j).unwrap();
                if mode == PairMode::AllPairs || distance == 1 {
                    pairs.push(Pair { i, j, distance });
                }
            }
        }
        pairs
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|n| n.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

impl FromStr for Lattice {
    type Err = Error;

    /// Parses `"3x3"`, `"2x2x2"` or `"4"`.
    fn from_str(s: &str) -> Result<Self> {
        let dims = s
            .split(['x', 'X', '×'])
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("bad lattice dims '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims)
    }
}

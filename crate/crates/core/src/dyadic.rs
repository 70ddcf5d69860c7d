//! Dyadic partitions of the unit cube `[0,1]^d`.
//!
//! A cell at level `k` has side length `r = 2^-k`; its extent along axis `i`
//! is the half-open interval `[coords[i]*r, (coords[i]+1)*r)`. Cells are
//! plain value types identified by `(level, coords)` — no tree is ever
//! materialized; learners hold explicit active-cell lists instead.
//!
//! The boundary coordinate `1.0` is clamped into the last cell along its
//! axis: the half-open cells exclude it, but a simulator cannot afford to
//! crash on a measure-zero event.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Highest supported partition level. Keeps `x * 2^k` exact in `f64`.
pub const MAX_LEVEL: u32 = 52;

/// A dyadic cell: level `k` plus integer coordinates, one per dimension.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    level: u32,
    coords: Vec<u64>,
}

impl Cell {
    pub fn new(level: u32, coords: Vec<u64>) -> Self {
        assert!(level <= MAX_LEVEL, "level {level} exceeds {MAX_LEVEL}");
        let side = 1u64 << level;
        assert!(
            coords.iter().all(|&c| c < side),
            "coords out of range for level {level}"
        );
        Cell { level, coords }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Side length `r = 2^-k`.
    pub fn side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    /// Extent along axis `i`: the half-open interval `[lo, hi)`.
    pub fn extent(&self, i: usize) -> (f64, f64) {
        let r = self.side();
        let lo = self.coords[i] as f64 * r;
        (lo, lo + r)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim());
        x.iter().enumerate().all(|(i, &xi)| {
            let (lo, hi) = self.extent(i);
            // The very last cell along an axis also owns the boundary 1.0.
            xi >= lo && (xi < hi || (xi == 1.0 && self.coords[i] + 1 == 1u64 << self.level))
        })
    }

    /// Center of the cell, `((coords_i + 1/2) * r)_i`.
    pub fn barycenter(&self) -> Vec<f64> {
        let r = self.side();
        self.coords.iter().map(|&c| (c as f64 + 0.5) * r).collect()
    }

    /// The parent cell one level up. Returns `None` at level 0.
    pub fn parent(&self) -> Option<Cell> {
        if self.level == 0 {
            return None;
        }
        Some(Cell {
            level: self.level - 1,
            coords: self.coords.iter().map(|&c| c / 2).collect(),
        })
    }

    /// Ancestor at the given coarser (or equal) level.
    pub fn ancestor(&self, level: u32) -> Cell {
        assert!(level <= self.level);
        let shift = self.level - level;
        Cell {
            level,
            coords: self.coords.iter().map(|&c| c >> shift).collect(),
        }
    }

    /// Splits the cell into its `2^d` children at level `k+1`, in
    /// lexicographic coordinate order.
    pub fn refine(&self) -> Vec<Cell> {
        let d = self.dim();
        let n_children = 1usize << d;
        let mut out = Vec::with_capacity(n_children);
        for mask in 0..n_children {
            let coords = self
                .coords
                .iter()
                .enumerate()
                .map(|(i, &c)| 2 * c + ((mask >> (d - 1 - i)) & 1) as u64)
                .collect();
            out.push(Cell {
                level: self.level + 1,
                coords,
            });
        }
        out
    }
}

impl fmt::Display for Cell {
    /// Serialized as `k:c1,c2,...,cd`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.level)?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cell({self})")
    }
}

/// Returns the level-`k` cell containing `x`.
///
/// Coordinates equal to `1.0` are clamped into the last cell; anything
/// outside `[0,1]` is a domain error.
pub fn cell_at(x: &[f64], level: u32) -> Result<Cell> {
    if level > MAX_LEVEL {
        return Err(Error::domain(format!("level {level} exceeds {MAX_LEVEL}")));
    }
    let side = 1u64 << level;
    let mut coords = Vec::with_capacity(x.len());
    for (i, &xi) in x.iter().enumerate() {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::domain(format!(
                "coordinate {i} = {xi} outside [0,1]"
            )));
        }
        let c = ((xi * side as f64) as u64).min(side - 1);
        coords.push(c);
    }
    Ok(Cell { level, coords })
}

/// The full partition of `[0,1]^d` at one level; `2^(k*d)` cells enumerated
/// lexicographically on coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicPartition {
    level: u32,
    dim: usize,
}

impl DyadicPartition {
    pub fn new(level: u32, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        let bits = level as usize * dim;
        if bits >= usize::BITS as usize {
            return Err(Error::domain(format!(
                "partition with 2^{bits} cells is not enumerable"
            )));
        }
        Ok(DyadicPartition { level, dim })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    /// Number of cells, `2^(k*d)`.
    pub fn len(&self) -> usize {
        1usize << (self.level as usize * self.dim)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lexicographic index of a cell at this partition's level.
    pub fn index_of(&self, cell: &Cell) -> usize {
        assert_eq!(cell.level, self.level);
        assert_eq!(cell.dim(), self.dim);
        let side = 1usize << self.level;
        cell.coords
            .iter()
            .fold(0usize, |acc, &c| acc * side + c as usize)
    }

    /// Cell at a lexicographic index.
    pub fn cell(&self, index: usize) -> Cell {
        assert!(index < self.len());
        let side = 1usize << self.level;
        let mut coords = vec![0u64; self.dim];
        let mut rest = index;
        for i in (0..self.dim).rev() {
            coords[i] = (rest % side) as u64;
            rest /= side;
        }
        Cell {
            level: self.level,
            coords,
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(move |i| self.cell(i))
    }

    /// Index of the cell containing `x`.
    pub fn index_at(&self, x: &[f64]) -> Result<usize> {
        Ok(self.index_of(&cell_at(x, self.level)?))
    }
}

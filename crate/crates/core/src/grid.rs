//! Regular cell grids for histograms and lattice point sets for grid checks.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Axis-aligned grid of `Π cells[i]` equal cells on `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    cells: Vec<usize>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.len() != cells.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len().min(cells.len()),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) || cells.contains(&0) {
            return Err(Error::InvalidArgument(
                "grid needs lo < hi and >= 1 cell per axis".into(),
            ));
        }
        Ok(Self { lo, hi, cells })
    }

    /// Same number of cells on every axis.
    pub fn uniform(lo: Vec<f64>, hi: Vec<f64>, cells: usize) -> Result<Self> {
        let d = lo.len();
        Self::new(lo, hi, vec![cells; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells
    }

    pub fn n_cells(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.cells[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.cell_width(i)).product()
    }

    /// Flat (row-major, last axis fastest) index of the cell containing `x`;
    /// points on the upper face belong to the last cell.
    #[inline]
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let mut idx = 0;
        for i in 0..self.dim() {
            let v = x[i];
            if !(v >= self.lo[i] && v <= self.hi[i]) {
                return None;
            }
            let k = ((v - self.lo[i]) / self.cell_width(i)) as usize;
            idx = idx * self.cells[i] + k.min(self.cells[i] - 1);
        }
        Some(idx)
    }

    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        let mut rem = flat;
        let mut c = vec![0.0; self.dim()];
        for i in (0..self.dim()).rev() {
            let k = rem % self.cells[i];
            rem /= self.cells[i];
            c[i] = self.lo[i] + (k as f64 + 0.5) * self.cell_width(i);
        }
        c
    }
}

/// `n^m` lattice points covering `[lo, hi]` including both ends (`n ≥ 2`).
pub fn lattice(lo: &[f64], hi: &[f64], n: usize) -> Vec<Vec<f64>> {
    let m = lo.len();
    let n = n.max(2);
    let total = n.pow(m as u32);
    (0..total)
        .map(|flat| {
            let mut rem = flat;
            let mut p = vec![0.0; m];
            for i in (0..m).rev() {
                let k = rem % n;
                rem /= n;
                p[i] = lo[i] + (hi[i] - lo[i]) * k as f64 / (n - 1) as f64;
            }
            p
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_lookup_roundtrip() {
        let g = Grid::new(vec![-1.0, 0.0], vec![1.0, 3.0], vec![4, 3]).unwrap();
        assert_eq!(g.n_cells(), 12);
        for k in 0..12 {
            assert_eq!(g.cell_of(&g.cell_center(k)), Some(k));
        }
        assert_eq!(g.cell_of(&[1.0, 3.0]), Some(11));
        assert_eq!(g.cell_of(&[1.1, 0.0]), None);
        assert!((g.cell_volume() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lattice_includes_corners() {
        let pts = lattice(&[0.0, 0.0], &[1.0, 2.0], 3);
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], vec![0.0, 0.0]);
        assert_eq!(pts[8], vec![1.0, 2.0]);
    }
}

//! Dense row-major matrices.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Plain `rows × dim` matrix; row `v` is the representation of vertex `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        EmbeddingMatrix {
            rows,
            dim,
            values: alloc::vec![0.0; rows * dim],
        }
    }

    pub fn from_vec(rows: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * dim {
            return Err(Error::DimensionMismatch {
                expected: rows * dim,
                actual: values.len(),
            });
        }
        Ok(EmbeddingMatrix { rows, dim, values })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.dim..(r + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.dim..(r + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact on a zero-width matrix would panic
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    /// Keeps the first `rows` rows.
    pub fn truncate(&mut self, rows: usize) {
        if rows < self.rows {
            self.rows = rows;
            self.values.truncate(rows * self.dim);
        }
    }

    /// A new matrix made of the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> EmbeddingMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        EmbeddingMatrix {
            rows: rows.len(),
            dim: self.dim,
            values,
        }
    }
}

/// A matrix of `f64` cells readable and writable through `&self`.
///
/// Every cell is an independent relaxed atomic: scalar accesses never tear,
/// whole rows may. Workers sharing one of these get lock-free, last-writer-wins
/// semantics on individual entries.
#[derive(Debug)]
pub struct SharedMatrix {
    rows: usize,
    dim: usize,
    cells: Vec<AtomicU64>,
}

impl SharedMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        let cells = (0..rows * dim).map(|_| AtomicU64::new(0)).collect();
        SharedMatrix { rows, dim, cells }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn cells(&self, r: usize) -> &[AtomicU64] {
        &self.cells[r * self.dim..(r + 1) * self.dim]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        f64::from_bits(self.cells(r)[c].load(Ordering::Relaxed))
    }

    #[inline]
    pub fn load_row(&self, r: usize, out: &mut [f64]) {
        for (o, cell) in out.iter_mut().zip(self.cells(r)) {
            *o = f64::from_bits(cell.load(Ordering::Relaxed));
        }
    }

    #[inline]
    pub fn store_row(&self, r: usize, values: &[f64]) {
        for (cell, v) in self.cells(r).iter().zip(values) {
            cell.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    /// Copy of the current contents; concurrent writers may leave rows torn.
    pub fn snapshot(&self) -> EmbeddingMatrix {
        let values = self
            .cells
            .iter()
            .map(|c| f64::from_bits(c.load(Ordering::Relaxed)))
            .collect();
        EmbeddingMatrix {
            rows: self.rows,
            dim: self.dim,
            values,
        }
    }
}

impl From<&EmbeddingMatrix> for SharedMatrix {
    fn from(m: &EmbeddingMatrix) -> Self {
        SharedMatrix {
            rows: m.rows,
            dim: m.dim,
            cells: m.values.iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
        }
    }
}

/// Read access to node parameter rows, whatever their storage.
pub trait RowSource {
    fn dim(&self) -> usize;
    fn row_dot(&self, r: usize, v: &[f64]) -> f64;
    fn row_into(&self, r: usize, out: &mut [f64]);
}

impl RowSource for EmbeddingMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn row_dot(&self, r: usize, v: &[f64]) -> f64 {
        crate::math::dot(self.row(r), v)
    }

    fn row_into(&self, r: usize, out: &mut [f64]) {
        out.copy_from_slice(self.row(r));
    }
}

impl RowSource for SharedMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn row_dot(&self, r: usize, v: &[f64]) -> f64 {
        self.cells(r)
            .iter()
            .zip(v)
            .map(|(c, x)| f64::from_bits(c.load(Ordering::Relaxed)) * x)
            .sum()
    }

    fn row_into(&self, r: usize, out: &mut [f64]) {
        self.load_row(r, out);
    }
}

//! Dense bit-packed linear algebra over the two-element field.
//!
//! Everything homological in this crate reduces to rank / solve / kernel
//! computations over GF(2) = {0, 1}, where addition is XOR. Matrices are
//! stored row-major with 64 entries per word. The field is fixed to GF(2):
//! homology of simplicial complexes is well defined there and reduction is
//! fastest, at the price of not seeing odd-torsion phenomena.

use std::fmt;

/// A dense matrix over GF(2), bit-packed row-major (64 columns per word).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl F2Matrix {
    /// Creates a zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    /// Creates the identity matrix of the given dimension.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 entries.
    ///
    /// # Panics
    /// Panics if the rows have unequal lengths.
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows in F2Matrix::from_rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v % 2 == 1);
            }
        }
        m
    }

    /// Builds an r x 1 column matrix from a slice of 0/1 entries.
    pub fn column_from_bits(bits: &[u8]) -> Self {
        let mut m = Self::zeros(bits.len(), 1);
        for (i, &v) in bits.iter().enumerate() {
            m.set(i, 0, v % 2 == 1);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        let w = self.data[r * self.words_per_row + c / 64];
        (w >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.words_per_row + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let (a, b) = (src * self.words_per_row, dst * self.words_per_row);
        for k in 0..self.words_per_row {
            let w = self.data[a + k];
            self.data[b + k] ^= w;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.words_per_row {
            self.data.swap(a * self.words_per_row + k, b * self.words_per_row + k);
        }
    }

    /// Matrix product over GF(2).
    ///
    /// # Panics
    /// Panics if `self.cols() != rhs.rows()`.
    pub fn mul(&self, rhs: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in F2 matrix product");
        let mut out = F2Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    let (a, b) = (k * rhs.words_per_row, i * out.words_per_row);
                    for w in 0..rhs.words_per_row {
                        out.data[b + w] ^= rhs.data[a + w];
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut out = F2Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    out.set(j, i, true);
                }
            }
        }
        out
    }

    /// Horizontal concatenation `[self | rhs]`.
    ///
    /// # Panics
    /// Panics if the row counts differ.
    pub fn hstack(&self, rhs: &F2Matrix) -> F2Matrix {
        assert_eq!(self.rows, rhs.rows, "row mismatch in hstack");
        let mut out = F2Matrix::zeros(self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    out.set(i, j, true);
                }
            }
            for j in 0..rhs.cols {
                if rhs.get(i, j) {
                    out.set(i, self.cols + j, true);
                }
            }
        }
        out
    }

    /// Returns the column `c` as an r x 1 matrix.
    pub fn column(&self, c: usize) -> F2Matrix {
        let mut out = F2Matrix::zeros(self.rows, 1);
        for i in 0..self.rows {
            if self.get(i, c) {
                out.set(i, 0, true);
            }
        }
        out
    }

    /// Gaussian elimination in place; returns the pivot columns (rank profile).
    fn echelonize(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| self.get(r, col)) else {
                continue;
            };
            self.swap_rows(row, p);
            for r in 0..self.rows {
                if r != row && self.get(r, col) {
                    self.xor_row_into(row, r);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        self.clone().echelonize().len()
    }

    /// Solves `self * x = b` for one solution, or `None` if inconsistent.
    ///
    /// `b` must be an r x 1 column with `r == self.rows()`.
    ///
    /// # Panics
    /// Panics on dimension mismatch.
    pub fn solve(&self, b: &F2Matrix) -> Option<F2Matrix> {
        assert_eq!(b.rows, self.rows, "rhs length mismatch in solve");
        assert_eq!(b.cols, 1, "rhs must be a single column");
        self.solve_many(b)
    }

    /// Solves `self * X = B` columnwise; `None` if any column is inconsistent.
    ///
    /// # Panics
    /// Panics if `B.rows() != self.rows()`.
    pub fn solve_many(&self, bs: &F2Matrix) -> Option<F2Matrix> {
        assert_eq!(bs.rows, self.rows, "rhs length mismatch in solve");
        let mut aug = self.hstack(bs);
        let pivots = aug.echelonize();
        // A pivot landing in the augmented block means that column is
        // outside the column space of self.
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = F2Matrix::zeros(self.cols, bs.cols);
        for (r, &c) in pivots.iter().enumerate() {
            for j in 0..bs.cols {
                if aug.get(r, self.cols + j) {
                    x.set(c, j, true);
                }
            }
        }
        Some(x)
    }

    /// Returns a matrix whose columns form a basis of the kernel of `self`.
    pub fn kernel_basis(&self) -> F2Matrix {
        let mut ech = self.clone();
        let pivots = ech.echelonize();
        let is_pivot = {
            let mut v = vec![false; self.cols];
            for &c in &pivots {
                v[c] = true;
            }
            v
        };
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = F2Matrix::zeros(self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            basis.set(fc, k, true);
            for (r, &pc) in pivots.iter().enumerate() {
                if ech.get(r, fc) {
                    basis.set(pc, k, true);
                }
            }
        }
        basis
    }

    /// Returns the indices of columns forming a basis of the column space.
    pub fn column_space_pivots(&self) -> Vec<usize> {
        self.clone().echelonize()
    }

    /// Inverse of a square matrix, or `None` if singular.
    pub fn inverse(&self) -> Option<F2Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let inv = self.solve_many(&F2Matrix::identity(self.rows))?;
        Some(inv)
    }
}

impl fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F2Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{}", u8::from(self.get(i, j)))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

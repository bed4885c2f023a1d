//! Minimal compressed-sparse-row matrix over `Complex64`.
//!
//! Only what operator assembly and the Krylov solver need: construction from
//! triplets, matrix-vector products, transpose, sums and products. All
//! operations are deterministic (fixed traversal and reduction order).

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<u32>,
    pub values: Vec<Complex64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets: duplicates are summed and
    /// exact zeros pruned, so structurally absent and numerically zero
    /// entries are indistinguishable.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &mut Vec<(u32, u32, Complex64)>,
    ) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| ((r as u64) << 32) | c as u64);
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets.iter() {
            if let (Some(&last_c), Some(&last_r)) = (col_idx.last(), rows.last()) {
                if last_r == r && last_c == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            col_idx.push(c);
            values.push(v);
        }
        // Prune exact zeros (including signed zeros).
        let mut w = 0;
        for i in 0..values.len() {
            if values[i].re != 0.0 || values[i].im != 0.0 {
                rows[w] = rows[i];
                col_idx[w] = col_idx[i];
                values[w] = values[i];
                w += 1;
            }
        }
        rows.truncate(w);
        col_idx.truncate(w);
        values.truncate(w);
        for &r in &rows {
            row_ptr[r as usize + 1] += 1;
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n_rows, n_cols, row_ptr, col_idx, values }
    }

    pub fn diagonal_from(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut trips: Vec<(u32, u32, Complex64)> =
            diag.iter().enumerate().map(|(i, &v)| (i as u32, i as u32, v)).collect();
        Self::from_triplets(n, n, &mut trips)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        let mut d = vec![Complex64::new(0.0, 0.0); self.n_rows.min(self.n_cols)];
        for r in 0..self.n_rows {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[idx] as usize == r {
                    d[r] = self.values[idx];
                }
            }
        }
        d
    }

    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for r in 0..self.n_rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[idx] * x[self.col_idx[idx] as usize];
            }
            y[r] = acc;
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut col_idx = vec![0u32; self.nnz()];
        let mut values = vec![Complex64::new(0.0, 0.0); self.nnz()];
        let mut cursor = counts;
        for r in 0..self.n_rows {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[idx] as usize;
                col_idx[cursor[c]] = r as u32;
                values[cursor[c]] = self.values[idx];
                cursor[c] += 1;
            }
        }
        Self { n_rows: self.n_cols, n_cols: self.n_rows, row_ptr, col_idx, values }
    }

    /// Left scaling: `diag(d) * self`.
    pub fn scale_rows(&mut self, d: &[Complex64]) {
        for r in 0..self.n_rows {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                self.values[idx] *= d[r];
            }
        }
    }

    /// `self + alpha * other` (matching shapes).
    pub fn add_scaled(&self, other: &Self, alpha: Complex64) -> Self {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut trips = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.n_rows {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                trips.push((r as u32, self.col_idx[idx], self.values[idx]));
            }
            for idx in other.row_ptr[r]..other.row_ptr[r + 1] {
                trips.push((r as u32, other.col_idx[idx], alpha * other.values[idx]));
            }
        }
        Self::from_triplets(self.n_rows, self.n_cols, &mut trips)
    }

    /// Sparse product `self * other` with a dense accumulator per row.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n_cols, other.n_rows);
        let mut acc = vec![Complex64::new(0.0, 0.0); other.n_cols];
        let mut touched: Vec<u32> = Vec::new();
        let mut trips: Vec<(u32, u32, Complex64)> = Vec::new();
        for r in 0..self.n_rows {
            touched.clear();
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                let k = self.col_idx[idx] as usize;
                let v = self.values[idx];
                for jdx in other.row_ptr[k]..other.row_ptr[k + 1] {
                    let c = other.col_idx[jdx] as usize;
                    if acc[c].re == 0.0 && acc[c].im == 0.0 {
                        touched.push(c as u32);
                    }
                    acc[c] += v * other.values[jdx];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                let v = acc[c as usize];
                if v.re != 0.0 || v.im != 0.0 {
                    trips.push((r as u32, c, v));
                }
                acc[c as usize] = Complex64::new(0.0, 0.0);
            }
        }
        Self::from_triplets(self.n_rows, other.n_cols, &mut trips)
    }

    /// Largest absolute entry of `self - other` over the union sparsity.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let diff = self.add_scaled(other, Complex64::new(-1.0, 0.0));
        diff.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

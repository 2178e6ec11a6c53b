//! Dense row-major f64 matrices with the handful of products backprop needs.
//!
//! Kernels are written over exact-length slices so the inner loops vectorize;
//! at desk scale this is the entire compute budget of training.

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// `self (m x k) * rhs (k x n)`.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimension mismatch");
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        let mut out = Matrix::zeros(m, n);
        for (a_row, c_row) in self
            .data
            .chunks_exact(k)
            .zip(out.data.chunks_exact_mut(n))
        {
            for (&a, b_row) in a_row.iter().zip(rhs.data.chunks_exact(n)) {
                if a == 0.0 {
                    continue;
                }
                for (c, &b) in c_row.iter_mut().zip(b_row) {
                    *c += a * b;
                }
            }
        }
        out
    }

    /// `self (m x k) * rhs^T`, where `rhs` is `(n x k)`.
    pub fn matmul_rhs_transposed(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.cols, "matmul_t inner dimension mismatch");
        let (m, k, n) = (self.rows, self.cols, rhs.rows);
        let mut out = Matrix::zeros(m, n);
        for (a_row, c_row) in self
            .data
            .chunks_exact(k)
            .zip(out.data.chunks_exact_mut(n))
        {
            for (c, b_row) in c_row.iter_mut().zip(rhs.data.chunks_exact(k)) {
                let mut acc = 0.0;
                for (&a, &b) in a_row.iter().zip(b_row) {
                    acc += a * b;
                }
                *c = acc;
            }
        }
        out
    }

    /// `self^T * rhs`, where `self` is `(m x k)` and `rhs` is `(m x n)`.
    pub fn matmul_lhs_transposed(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows, "matmul_lt row count mismatch");
        let (k, n) = (self.cols, rhs.cols);
        let mut out = Matrix::zeros(k, n);
        for (a_row, b_row) in self.data.chunks_exact(k).zip(rhs.data.chunks_exact(n)) {
            for (&a, c_row) in a_row.iter().zip(out.data.chunks_exact_mut(n)) {
                if a == 0.0 {
                    continue;
                }
                for (c, &b) in c_row.iter_mut().zip(b_row) {
                    *c += a * b;
                }
            }
        }
        out
    }

    /// Adds `v` to every row.
    pub fn add_row_vector(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.cols, "row vector length mismatch");
        for row in self.data.chunks_exact_mut(self.cols) {
            for (r, &b) in row.iter_mut().zip(v) {
                *r += b;
            }
        }
    }

    /// Column sums as a vector of length `cols`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols) {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }
}

use crate::error::{Error, Result};
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, Default)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Build from unsorted triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, f64)>) -> Csr {
        trip.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col = Vec::with_capacity(trip.len());
        let mut val: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(c);
                val.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr { nrows, ncols, row_ptr, col, val }
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows).map(|i| self.val[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.nrows {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            y[i] = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec(x, &mut y);
        y
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col[r.clone()].binary_search(&j) {
            Ok(k) => self.val[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn quad_form(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.nrows {
            let mut t = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                t += self.val[k] * y[self.col[k]];
            }
            s += x[i] * t;
        }
        s
    }

    /// `self + alpha * other`, both with the same shape.
    pub fn add_scaled(&self, alpha: f64, other: &Csr) -> Csr {
        let mut trip = Vec::with_capacity(self.nnz() + other.nnz());
        for (m, s) in [(self, 1.0), (other, alpha)] {
            for i in 0..m.nrows {
                for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                    trip.push((i, m.col[k], s * m.val[k]));
                }
            }
        }
        Csr::from_triplets(self.nrows, self.ncols, trip)
    }
}

/// Sparse Cholesky factor of a symmetric positive definite matrix.
pub struct Cholesky {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    n: usize,
}

impl Cholesky {
    pub fn new(a: &Csr) -> Result<Cholesky> {
        let mut trip = Vec::with_capacity(a.nnz() / 2 + a.nrows);
        for i in 0..a.nrows {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col[k];
                if j <= i {
                    trip.push(Triplet::new(i, j, a.val[k]));
                }
            }
        }
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(a.nrows, a.ncols, &trip)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let llt = m
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Factorization(format!("matrix is not positive definite ({e:?})")))?;
        Ok(Cholesky { llt, n: a.nrows })
    }

    /// Solve in place for each column of `b` (column-major, `n` rows).
    pub fn solve_block(&self, b: &mut [f64], ncols: usize) {
        let n = self.n;
        let mut m = Mat::<f64>::from_fn(n, ncols, |i, j| b[j * n + i]);
        self.llt.solve_in_place(m.as_mut());
        for j in 0..ncols {
            for i in 0..n {
                b[j * n + i] = m[(i, j)];
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_block(&mut x, 1);
        x
    }
}

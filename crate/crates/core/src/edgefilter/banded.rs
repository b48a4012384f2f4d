//! Banded matrices stored by diagonal offsets, with an LU solver that runs in
//! time linear in the matrix side.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Rectangular matrix whose non-zeros lie within `lower` subdiagonals and
/// `upper` superdiagonals of the main diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T> {
    rows: usize,
    cols: usize,
    lower: usize,
    upper: usize,
    /// Row-major band storage: row `i` holds entries for columns
    /// `i - lower ..= i + upper`, clipped at the matrix edges.
    data: Vec<T>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn zeros(rows: usize, cols: usize, lower: usize, upper: usize) -> Self {
        let width = lower + upper + 1;
        Self { rows, cols, lower, upper, data: vec![T::zero(); rows * width] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    fn index(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.rows || j >= self.cols {
            return None;
        }
        let (i, j) = (i as isize, j as isize);
        let off = j - i;
        if off < -(self.lower as isize) || off > self.upper as isize {
            return None;
        }
        Some(i as usize * (self.lower + self.upper + 1) + (off + self.lower as isize) as usize)
    }

    /// Entry at (i, j); zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.index(i, j).map_or(T::zero(), |k| self.data[k])
    }

    /// Sets an in-band entry; out-of-band writes are rejected.
    pub fn set(&mut self, i: usize, j: usize, v: T) -> Result<()> {
        match self.index(i, j) {
            Some(k) => {
                self.data[k] = v;
                Ok(())
            }
            None => Err(Error::arg(format!("entry ({i}, {j}) outside the stored band"))),
        }
    }

    /// Banded matrix-vector product.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "vector length must match column count");
        let width = self.lower + self.upper + 1;
        (0..self.rows)
            .map(|i| {
                let j_lo = i.saturating_sub(self.lower);
                let j_hi = (i + self.upper).min(self.cols.saturating_sub(1));
                let base = i * width;
                let mut acc = T::zero();
                for j in j_lo..=j_hi {
                    acc += self.data[base + (j + self.lower - i)] * x[j];
                }
                acc
            })
            .collect()
    }

    /// Dense copy, for oracles and debugging.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// LU factorization of a square banded matrix.
///
/// Elimination runs without row interchanges while pivots stay above
/// `1e-12` in magnitude and falls back to partial pivoting otherwise; the
/// factored band carries `lower` extra superdiagonals for pivot fill-in.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    lower: usize,
    /// Upper bandwidth of the factored band (`lower + upper` of the input).
    upper_w: usize,
    data: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    pub fn factor(a: &BandedMatrix<T>) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::arg("LU factorization requires a square matrix"));
        }
        let n = a.rows();
        let kl = a.lower_bandwidth();
        let kuw = a.lower_bandwidth() + a.upper_bandwidth();
        let width = kl + kuw + 1;
        let mut w = vec![T::zero(); n * width];
        let idx = |i: usize, j: usize| -> usize { i * width + (j + kl - i) };
        let in_band = |i: usize, j: usize| -> bool {
            (j as isize - i as isize) >= -(kl as isize) && (j as isize - i as isize) <= kuw as isize
        };
        for i in 0..n {
            let j_lo = i.saturating_sub(kl);
            let j_hi = (i + a.upper_bandwidth()).min(n - 1);
            for j in j_lo..=j_hi {
                w[idx(i, j)] = a.get(i, j);
            }
        }

        let pivot_floor = real::<T>(1e-12);
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let i_max = (k + kl).min(n - 1);
            let mut p = k;
            if w[idx(k, k)].abs() < pivot_floor {
                for i in k + 1..=i_max {
                    if w[idx(i, k)].abs() > w[idx(p, k)].abs() {
                        p = i;
                    }
                }
            }
            if w[idx(p, k)].abs() < pivot_floor {
                return Err(Error::Numeric(format!(
                    "banded matrix is numerically singular at column {k}"
                )));
            }
            pivots[k] = p;
            if p != k {
                let j_hi = (k + kuw).min(n - 1);
                for j in k..=j_hi {
                    debug_assert!(in_band(k, j) && in_band(p, j));
                    w.swap(idx(k, j), idx(p, j));
                }
            }
            let j_hi = (k + kuw).min(n - 1);
            for i in k + 1..=i_max {
                let m = w[idx(i, k)] / w[idx(k, k)];
                w[idx(i, k)] = m;
                for j in k + 1..=j_hi {
                    let delta = m * w[idx(k, j)];
                    w[idx(i, j)] -= delta;
                }
            }
        }
        Ok(Self { n, lower: kl, upper_w: kuw, data: w, pivots })
    }

    /// Solves `A x = b` using the stored factors.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n, "rhs length must match matrix side");
        let width = self.lower + self.upper_w + 1;
        let idx = |i: usize, j: usize| -> usize { i * width + (j + self.lower - i) };
        let mut x = b.to_vec();
        for k in 0..self.n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let i_max = (k + self.lower).min(self.n - 1);
            for i in k + 1..=i_max {
                let delta = self.data[idx(i, k)] * x[k];
                x[i] -= delta;
            }
        }
        for k in (0..self.n).rev() {
            let j_hi = (k + self.upper_w).min(self.n - 1);
            let mut s = x[k];
            for j in k + 1..=j_hi {
                s -= self.data[idx(k, j)] * x[j];
            }
            x[k] = s / self.data[idx(k, k)];
        }
        x
    }
}

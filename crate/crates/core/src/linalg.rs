//! Small dense linear algebra used by registration and fault detection:
//! a minimal matrix carrier, 3x3 solves, and one-sided Jacobi singular values.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Row-major dense matrix. Sized for tiles and small normal systems, not for
/// large images.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::arg(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
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

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn mul(&self, rhs: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == T::zero())
    }
}

/// Solves a 3x3 system with partial pivoting. `None` when singular.
pub fn solve3<T: Real>(a: [[T; 3]; 3], b: [T; 3]) -> Option<[T; 3]> {
    let mut m = a;
    let mut rhs = b;
    for k in 0..3 {
        let mut p = k;
        for i in k + 1..3 {
            if m[i][k].abs() > m[p][k].abs() {
                p = i;
            }
        }
        if m[p][k].abs() < real::<T>(1e-12) {
            return None;
        }
        m.swap(k, p);
        rhs.swap(k, p);
        for i in k + 1..3 {
            let f = m[i][k] / m[k][k];
            for j in k..3 {
                m[i][j] = m[i][j] - f * m[k][j];
            }
            rhs[i] = rhs[i] - f * rhs[k];
        }
    }
    let mut x = [T::zero(); 3];
    for k in (0..3).rev() {
        let mut s = rhs[k];
        for j in k + 1..3 {
            s = s - m[k][j] * x[j];
        }
        x[k] = s / m[k][k];
    }
    Some(x)
}

/// Singular values by one-sided Jacobi orthogonalization, sorted descending.
///
/// Columns are rotated until pairwise orthogonal; the singular values are the
/// final column norms. The rotation scheme delivers small singular values with
/// high relative accuracy, which is what relative-tolerance rank counting needs.
pub fn singular_values<T: Real>(m: &DenseMatrix<T>) -> Vec<T> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut col: Vec<Vec<T>> = (0..cols).map(|j| (0..rows).map(|i| m.get(i, j)).collect()).collect();
    let tol = T::epsilon() * real::<T>(32.0);
    for _sweep in 0..64 {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let (mut aa, mut bb, mut cc) = (T::zero(), T::zero(), T::zero());
                for k in 0..rows {
                    aa += col[i][k] * col[i][k];
                    bb += col[i][k] * col[j][k];
                    cc += col[j][k] * col[j][k];
                }
                if aa == T::zero() || cc == T::zero() {
                    continue;
                }
                if bb.abs() <= tol * (aa * cc).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (cc - aa) / (real::<T>(2.0) * bb);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                for k in 0..rows {
                    let x = col[i][k];
                    let y = col[j][k];
                    col[i][k] = cs * x - sn * y;
                    col[j][k] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = col
        .iter()
        .map(|c| c.iter().map(|v| *v * *v).sum::<T>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solve3_recovers_known_solution() {
        let a = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let x_true = [1.0, -2.0, 3.0];
        let b = [
            a[0][0] * x_true[0] + a[0][1] * x_true[1] + a[0][2] * x_true[2],
            a[1][0] * x_true[0] + a[1][1] * x_true[1] + a[1][2] * x_true[2],
            a[2][0] * x_true[0] + a[2][1] * x_true[1] + a[2][2] * x_true[2],
        ];
        let x = solve3(a, b).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert_relative_eq!(xi, ti, epsilon = 1e-12);
        }
    }

    #[test]
    fn solve3_detects_singular() {
        let a = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]];
        assert!(solve3(a, [1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn singular_values_of_diagonal() {
        let mut m = DenseMatrix::<f64>::zeros(3, 3);
        m.set(0, 0, 3.0);
        m.set(1, 1, -5.0);
        m.set(2, 2, 0.5);
        let sv = singular_values(&m);
        assert_relative_eq!(sv[0], 5.0, epsilon = 1e-12);
        assert_relative_eq!(sv[1], 3.0, epsilon = 1e-12);
        assert_relative_eq!(sv[2], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn singular_values_match_nalgebra_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let (r, c) = (4 + trial % 3, 4 + (trial / 3) % 3);
            let m = DenseMatrix::from_fn(r, c, |_, _| rng.random_range(-2.0..2.0));
            let mine = singular_values(&m);
            let na = nalgebra::DMatrix::from_fn(r, c, |i, j| m.get(i, j))
                .svd(false, false)
                .singular_values;
            let mut theirs: Vec<f64> = na.iter().copied().collect();
            theirs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (a, b) in mine.iter().zip(&theirs) {
                assert_relative_eq!(a, b, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn zero_matrix_has_zero_singular_values() {
        let m = DenseMatrix::<f64>::zeros(4, 4);
        assert!(singular_values(&m).iter().all(|&s| s == 0.0));
    }
}

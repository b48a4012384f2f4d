//! Zero-phase high-pass Butterworth filtering via sparse banded matrices,
//! applied row- and column-wise to extract edge magnitudes.
//!
//! The filter realizes the frequency response
//!
//! ```text
//! H(w) = (2 - 2 cos w)^d / [(2 - 2 cos w)^d + alpha (2 + 2 cos w)^d]
//! alpha = ((1 - cos wc) / (1 + cos wc))^d
//! ```
//!
//! which is 0 at DC, 1 at the Nyquist frequency and exactly 1/2 at the
//! cutoff. A signal is filtered by solving the banded system `A y = B x`:
//! `B` carries the numerator taps on full-tap interior rows (so constants are
//! annihilated exactly) and `A` the symmetric denominator band.

pub mod banded;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::scalar::{real, Real};
use banded::{BandedLu, BandedMatrix};

/// Zero-phase high-pass Butterworth filter in banded-matrix form.
///
/// `A` is `(N + 2d - 1)` square, `B` is `(N + 2d - 1) x (N + 2d)`, both with
/// bandwidth at most `2d + 1`; the system is solved as `y = A^-1 B x`.
#[derive(Debug, Clone)]
pub struct ZeroPhaseHighPass<T> {
    order: usize,
    cutoff: T,
    alpha: T,
    signal_len: usize,
    numerator: Vec<T>,
    denominator: Vec<T>,
    a: BandedMatrix<T>,
    b: BandedMatrix<T>,
    lu: BandedLu<T>,
}

/// Coefficients of `[-1, 2, -1]^d` or `[1, 2, 1]^d` (exact integers).
fn tap_power(base: [i64; 3], d: usize) -> Vec<i64> {
    let mut taps = vec![1i64];
    for _ in 0..d {
        let mut next = vec![0i64; taps.len() + 2];
        for (i, t) in taps.iter().enumerate() {
            for (j, b) in base.iter().enumerate() {
                next[i + j] += t * b;
            }
        }
        taps = next;
    }
    taps
}

/// Designs the filter for signals of length `n`.
pub fn design_filter<T: Real>(order: usize, cutoff: T, n: usize) -> Result<ZeroPhaseHighPass<T>> {
    if order < 1 {
        return Err(Error::arg("filter order must be at least 1"));
    }
    if !(cutoff > T::zero() && cutoff < real::<T>(std::f64::consts::PI)) {
        return Err(Error::arg("cutoff must lie in (0, pi)"));
    }
    if n <= 2 * order {
        return Err(Error::arg("signal length must exceed twice the filter order"));
    }
    let d = order;
    let cos_c = cutoff.cos();
    let alpha = ((T::one() - cos_c) / (T::one() + cos_c)).powi(d as i32);

    let num_i = tap_power([-1, 2, -1], d);
    let smooth_i = tap_power([1, 2, 1], d);
    let numerator: Vec<T> = num_i.iter().map(|&v| real::<T>(v as f64)).collect();
    let denominator: Vec<T> = num_i
        .iter()
        .zip(&smooth_i)
        .map(|(&nv, &sv)| real::<T>(nv as f64) + alpha * real::<T>(sv as f64))
        .collect();

    let m = n + 2 * d - 1;
    let mut a = BandedMatrix::zeros(m, m, d, d);
    for i in 0..m {
        let j_lo = i.saturating_sub(d);
        let j_hi = (i + d).min(m - 1);
        for j in j_lo..=j_hi {
            a.set(i, j, denominator[j + d - i])?;
        }
    }

    // Numerator rows carry the full 2d+1 taps so that any constant input is
    // annihilated exactly; rows whose tap window would straddle the padded
    // signal boundary are left zero and resolve as attenuated border samples.
    let mut b = BandedMatrix::zeros(m, n + 2 * d, d - 1, d + 1);
    for i in (2 * d - 1)..=(n - 2) {
        for (k, tap) in numerator.iter().enumerate() {
            b.set(i, i + 1 - d + k, *tap)?;
        }
    }

    let lu = BandedLu::factor(&a)?;
    Ok(ZeroPhaseHighPass {
        order,
        cutoff,
        alpha,
        signal_len: n,
        numerator,
        denominator,
        a,
        b,
        lu,
    })
}

impl<T: Real> ZeroPhaseHighPass<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn a_matrix(&self) -> &BandedMatrix<T> {
        &self.a
    }

    pub fn b_matrix(&self) -> &BandedMatrix<T> {
        &self.b
    }

    /// Frequency response at `omega`, evaluated from the stored symmetric taps.
    pub fn response(&self, omega: T) -> T {
        let d = self.order;
        let eval = |taps: &[T]| {
            let mut acc = taps[d];
            for m in 1..=d {
                acc += real::<T>(2.0) * taps[d + m] * (omega * real::<T>(m as f64)).cos();
            }
            acc
        };
        eval(&self.numerator) / eval(&self.denominator)
    }

    /// Filters a signal of length at most `N` (shorter inputs are zero-padded
    /// to `N`); returns the `N` central samples of the banded solve.
    pub fn apply_filter_1d(&self, x: &[T]) -> Result<Vec<T>> {
        let n = self.signal_len;
        let d = self.order;
        if x.len() > n {
            return Err(Error::arg(format!(
                "signal length {} exceeds the design length {n}",
                x.len()
            )));
        }
        let mut padded = vec![T::zero(); n + 2 * d];
        padded[d..d + x.len()].copy_from_slice(x);
        let rhs = self.b.mul_vec(&padded);
        let y = self.lu.solve(&rhs);
        Ok(y[d - 1..d - 1 + n].to_vec())
    }
}

/// Non-negative edge magnitudes with the source image's dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeImage<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> EdgeImage<T> {
    pub fn from_raw(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::arg("edge buffer length does not match dimensions"));
        }
        if data.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::arg("edge magnitudes must be finite and non-negative"));
        }
        Ok(Self { rows, cols, data })
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

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn max_value(&self) -> T {
        self.data.iter().copied().fold(T::zero(), T::max)
    }

    /// Max-normalized copy in `[0, 1]` for export; internal values stay raw.
    pub fn to_normalized_gray(&self) -> GrayImage<T> {
        let peak = self.max_value();
        GrayImage::from_fn(self.rows, self.cols, |r, c| {
            if peak > T::zero() {
                self.get(r, c) / peak
            } else {
                T::zero()
            }
        })
    }

    /// Transposed copy (used by symmetry checks).
    pub fn transposed(&self) -> EdgeImage<T> {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        EdgeImage { rows: self.cols, cols: self.rows, data }
    }
}

/// Filters every row and every column and combines the responses into the
/// per-pixel magnitude `sqrt(V^2 + H^2)`.
pub fn extract_edges<T: Real>(
    img: &GrayImage<T>,
    filter: &ZeroPhaseHighPass<T>,
) -> Result<EdgeImage<T>> {
    let (p, q) = (img.rows(), img.cols());
    if p > filter.signal_len() || q > filter.signal_len() {
        return Err(Error::arg(format!(
            "image {p}x{q} exceeds the filter design length {}",
            filter.signal_len()
        )));
    }
    let vertical: Vec<Vec<T>> = (0..p)
        .into_par_iter()
        .map(|r| {
            let mut out = filter.apply_filter_1d(img.row(r)).expect("length checked");
            out.truncate(q);
            out
        })
        .collect();
    let horizontal: Vec<Vec<T>> = (0..q)
        .into_par_iter()
        .map(|c| {
            let col: Vec<T> = (0..p).map(|r| img.get(r, c)).collect();
            let mut out = filter.apply_filter_1d(&col).expect("length checked");
            out.truncate(p);
            out
        })
        .collect();
    let mut data = Vec::with_capacity(p * q);
    for r in 0..p {
        for c in 0..q {
            let v = vertical[r][c];
            let h = horizontal[c][r];
            data.push((v * v + h * h).sqrt());
        }
    }
    Ok(EdgeImage { rows: p, cols: q, data })
}

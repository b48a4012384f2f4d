//! Independent oracles shared by the integration and acceptance suites.
//!
//! Everything here recomputes expected values by a route disjoint from the
//! library implementation: exact integer/rational polynomial arithmetic,
//! iterative fixed-point label promotion, and direct DFT filtering.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use inspect_core::mask::BinaryMask;
use inspect_core::subtract::{Label, LabelMap};

// ---------------------------------------------------------------------------
// Exact polynomial arithmetic (ascending coefficient order).

/// Multiplies two integer polynomials.
pub fn poly_mul_i64(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add_i64(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn poly_neg_i64(a: &[i64]) -> Vec<i64> {
    a.iter().map(|&x| -x).collect()
}

/// Characteristic polynomial of an integer matrix by cofactor expansion of
/// `det(lambda I - M)` over the polynomial ring. Exact for small matrices.
pub fn charpoly_cofactor_i64(m: &[Vec<i64>]) -> Vec<i64> {
    let n = m.len();
    // Entries of lambda*I - M as ascending-order polynomials.
    let entries: Vec<Vec<Vec<i64>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        vec![-m[i][j], 1]
                    } else {
                        vec![-m[i][j]]
                    }
                })
                .collect()
        })
        .collect();
    fn det(rows: &[usize], cols: &[usize], e: &[Vec<Vec<i64>>]) -> Vec<i64> {
        if rows.len() == 1 {
            return e[rows[0]][cols[0]].clone();
        }
        let mut acc = vec![0i64];
        let r = rows[0];
        let rest: Vec<usize> = rows[1..].to_vec();
        for (k, &c) in cols.iter().enumerate() {
            let sub_cols: Vec<usize> =
                cols.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &v)| v).collect();
            let minor = det(&rest, &sub_cols, e);
            let term = poly_mul_i64(&e[r][c], &minor);
            acc = if k % 2 == 0 {
                poly_add_i64(&acc, &term)
            } else {
                poly_add_i64(&acc, &poly_neg_i64(&term))
            };
        }
        acc
    }
    let idx: Vec<usize> = (0..n).collect();
    det(&idx, &idx, &entries)
}

fn to_rational(poly: &[i64]) -> Vec<BigRational> {
    poly.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect()
}

fn rat_degree(poly: &[BigRational]) -> Option<usize> {
    poly.iter().rposition(|c| !c.is_zero())
}

/// Remainder of exact polynomial division over the rationals.
fn rat_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let db = rat_degree(b).expect("division by zero polynomial");
    let mut rem = a.to_vec();
    loop {
        let Some(dr) = rat_degree(&rem) else { return rem };
        if dr < db {
            return rem;
        }
        let factor = rem[dr].clone() / b[db].clone();
        let shift = dr - db;
        for (i, bc) in b.iter().enumerate() {
            let delta = factor.clone() * bc.clone();
            rem[i + shift] -= delta;
        }
        // The leading term cancels exactly in rational arithmetic.
        rem[dr] = BigRational::zero();
    }
}

/// Degree of gcd(a, b) by the Euclidean algorithm over exact rationals.
pub fn gcd_degree_exact(a: &[i64], b: &[i64]) -> usize {
    let mut x = to_rational(a);
    let mut y = to_rational(b);
    if rat_degree(&x) < rat_degree(&y) {
        std::mem::swap(&mut x, &mut y);
    }
    loop {
        let Some(dy) = rat_degree(&y) else {
            return rat_degree(&x).unwrap_or(0);
        };
        if dy == 0 {
            return 0;
        }
        let r = rat_rem(&x, &y);
        x = y;
        y = r;
    }
}

/// Resultant-style sanity helper: true iff the polynomials share no root.
pub fn coprime_exact(a: &[i64], b: &[i64]) -> bool {
    gcd_degree_exact(a, b) == 0
}

/// Monic check helper for oracle polynomials.
pub fn is_monic_i64(poly: &[i64]) -> bool {
    poly.last() == Some(&1)
}

// ---------------------------------------------------------------------------
// Hysteresis fixed-point oracle.

/// Iterative label promotion: start from strong pixels and keep adding weak
/// pixels 8-adjacent to the mask until nothing changes.
pub fn hysteresis_fixed_point(labels: &LabelMap) -> BinaryMask {
    let (p, q) = (labels.rows(), labels.cols());
    let mut mask = BinaryMask::new(p, q);
    for r in 0..p {
        for c in 0..q {
            if labels.get(r, c) == Label::Strong {
                mask.set(r, c, true);
            }
        }
    }
    loop {
        let mut changed = false;
        for r in 0..p {
            for c in 0..q {
                if mask.get(r, c) || labels.get(r, c) != Label::Weak {
                    continue;
                }
                'scan: for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                        if nr >= 0
                            && nr < p as i64
                            && nc >= 0
                            && nc < q as i64
                            && mask.get(nr as usize, nc as usize)
                        {
                            mask.set(r, c, true);
                            changed = true;
                            break 'scan;
                        }
                    }
                }
            }
        }
        if !changed {
            return mask;
        }
    }
}

// ---------------------------------------------------------------------------
// Spectral filter oracle.

/// High-pass response `(2-2cos w)^d / ((2-2cos w)^d + alpha (2+2cos w)^d)`.
pub fn hp_response(order: usize, cutoff: f64, omega: f64) -> f64 {
    let alpha = ((1.0 - cutoff.cos()) / (1.0 + cutoff.cos())).powi(order as i32);
    let d = (2.0 - 2.0 * omega.cos()).powi(order as i32);
    let s = (2.0 + 2.0 * omega.cos()).powi(order as i32);
    d / (d + alpha * s)
}

/// Applies the response in the frequency domain with periodic handling via a
/// direct O(N^2) DFT.
pub fn dft_filter(x: &[f64], order: usize, cutoff: f64) -> Vec<f64> {
    let n = x.len();
    let tau = std::f64::consts::TAU;
    // Forward DFT.
    let mut spec: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let mut acc = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let ang = -tau * (k * t) as f64 / n as f64;
                acc.0 += v * ang.cos();
                acc.1 += v * ang.sin();
            }
            acc
        })
        .collect();
    for (k, c) in spec.iter_mut().enumerate() {
        let omega = tau * k as f64 / n as f64;
        let h = hp_response(order, cutoff, omega);
        c.0 *= h;
        c.1 *= h;
    }
    // Inverse DFT (real part).
    (0..n)
        .map(|t| {
            let mut acc = 0.0;
            for (k, &(re, im)) in spec.iter().enumerate() {
                let ang = tau * (k * t) as f64 / n as f64;
                acc += re * ang.cos() - im * ang.sin();
            }
            acc / n as f64
        })
        .collect()
}

pub fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for v in values {
        sum += v * v;
        count += 1;
    }
    (sum / count.max(1) as f64).sqrt()
}

#[test]
fn oracle_self_checks() {
    // gcd of (x-1)(x-2) and (x-1)(x-3) is degree 1.
    let a = poly_mul_i64(&[-1, 1], &[-2, 1]);
    let b = poly_mul_i64(&[-1, 1], &[-3, 1]);
    assert_eq!(gcd_degree_exact(&a, &b), 1);
    assert!(coprime_exact(&[-1, 1], &[-2, 1]));

    // Cofactor charpoly of the 2x2 identity: (lambda - 1)^2.
    let m = vec![vec![1, 0], vec![0, 1]];
    assert_eq!(charpoly_cofactor_i64(&m), vec![1, -2, 1]);

    // DFT filter of a pure Nyquist tone is (numerically) the identity.
    let x: Vec<f64> = (0..32).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let y = dft_filter(&x, 3, 0.9);
    for (a, b) in x.iter().zip(&y) {
        assert!((a - b).abs() < 1e-9);
    }
}

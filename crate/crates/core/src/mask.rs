//! Binary pixel masks shared by the subtraction, fault-map and evaluation
//! stages.

use crate::error::{Error, Result};

/// A `p x q` grid of {0, 1} pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, bits: vec![false; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                bits.push(f(r, c));
            }
        }
        Self { rows, cols, bits }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.cols + col] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Pixel-wise AND; dimensions must match.
    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::arg("mask dimensions differ"));
        }
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, bits })
    }

    /// One dilation step over the 8-neighborhood.
    pub fn dilate8(&self) -> BinaryMask {
        let mut out = BinaryMask::new(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if !self.get(r, c) {
                    continue;
                }
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                        if nr >= 0 && nr < self.rows as i64 && nc >= 0 && nc < self.cols as i64 {
                            out.set(nr as usize, nc as usize, true);
                        }
                    }
                }
            }
        }
        out
    }
}

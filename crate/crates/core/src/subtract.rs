//! Pixel-wise absolute difference, double thresholding, hysteresis promotion,
//! and the binary defect-present decision.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::mask::BinaryMask;
use crate::scalar::Real;

/// Absolute-difference map with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMap<T> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Real> DiffMap<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.values[r * self.cols + c]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn from_values(rows: usize, cols: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::arg("difference buffer length does not match dimensions"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < T::zero() || *v > T::one()) {
            return Err(Error::arg("difference values must lie in [0, 1]"));
        }
        Ok(Self { rows, cols, values })
    }
}

/// Hysteresis thresholds with `0 <= min < max <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPair<T> {
    min: T,
    max: T,
}

impl<T: Real> ThresholdPair<T> {
    pub fn new(min: T, max: T) -> Result<Self> {
        if !(min >= T::zero() && min < max && max <= T::one()) {
            return Err(Error::arg("thresholds must satisfy 0 <= min < max <= 1"));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> T {
        self.min
    }

    pub fn max(&self) -> T {
        self.max
    }
}

/// Per-pixel classification against a [`ThresholdPair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    None,
    Weak,
    Strong,
}

/// Grid of [`Label`]s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    rows: usize,
    cols: usize,
    labels: Vec<Label>,
}

impl LabelMap {
    pub fn from_labels(rows: usize, cols: usize, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != rows * cols {
            return Err(Error::arg("label buffer length does not match dimensions"));
        }
        Ok(Self { rows, cols, labels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Label {
        self.labels[r * self.cols + c]
    }

    /// Copy with every pixel outside `valid` demoted to [`Label::None`].
    pub fn restricted_to(&self, valid: &BinaryMask) -> Result<LabelMap> {
        if valid.rows() != self.rows || valid.cols() != self.cols {
            return Err(Error::arg("validity mask dimensions differ"));
        }
        let labels = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                if valid.bits()[i] {
                    l
                } else {
                    Label::None
                }
            })
            .collect();
        Ok(LabelMap { rows: self.rows, cols: self.cols, labels })
    }
}

/// Element-wise `|a - b|`; dimensions must match.
pub fn absolute_difference<T: Real>(a: &GrayImage<T>, b: &GrayImage<T>) -> Result<DiffMap<T>> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::arg("image dimensions differ"));
    }
    let values = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(x, y)| (*x - *y).abs().min(T::one()))
        .collect();
    Ok(DiffMap { rows: a.rows(), cols: a.cols(), values })
}

/// Classifies each difference value: none below `min`, weak in `[min, max)`,
/// strong at `max` and above.
pub fn double_threshold<T: Real>(d: &DiffMap<T>, t: &ThresholdPair<T>) -> LabelMap {
    let labels = d
        .values
        .iter()
        .map(|&v| {
            if v >= t.max {
                Label::Strong
            } else if v >= t.min {
                Label::Weak
            } else {
                Label::None
            }
        })
        .collect();
    LabelMap { rows: d.rows, cols: d.cols, labels }
}

/// Chain-transitive hysteresis: a weak pixel joins the mask iff it is
/// 8-connected to a strong pixel through weak-or-strong terrain.
pub fn hysteresis(labels: &LabelMap) -> BinaryMask {
    let (p, q) = (labels.rows, labels.cols);
    let mut mask = BinaryMask::new(p, q);
    let mut queue = VecDeque::new();
    for r in 0..p {
        for c in 0..q {
            if labels.get(r, c) == Label::Strong {
                mask.set(r, c, true);
                queue.push_back((r, c));
            }
        }
    }
    while let Some((r, c)) = queue.pop_front() {
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr < 0 || nr >= p as i64 || nc < 0 || nc >= q as i64 {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                if !mask.get(nr, nc) && labels.get(nr, nc) != Label::None {
                    mask.set(nr, nc, true);
                    queue.push_back((nr, nc));
                }
            }
        }
    }
    mask
}

/// True iff the mask holds at least `min_defect_pixels` set pixels.
pub fn defect_present(mask: &BinaryMask, min_defect_pixels: usize) -> bool {
    let target = min_defect_pixels.max(1);
    let mut seen = 0usize;
    for &b in mask.bits() {
        if b {
            seen += 1;
            if seen >= target {
                return true;
            }
        }
    }
    false
}

//! Image carriers shared by every pipeline stage: RGB decode targets,
//! normalized grayscale grids, and intensity histograms.

pub mod codec;

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Default quantization level count (8-bit).
pub const DEFAULT_LEVELS: usize = 256;

/// Interleaved 8-bit RGB image, the decode target for PNG/PPM payloads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg("image dimensions must be at least 1x1"));
        }
        if pixels.len() != 3 * width * height {
            return Err(Error::arg(format!(
                "pixel buffer length {} does not match 3*{}*{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Channel triple at (row, col).
    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }
}

/// Grayscale image with normalized real intensities in `[0, 1]` and an
/// associated quantization level count `L` (256 unless stated otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T> {
    rows: usize,
    cols: usize,
    levels: usize,
    pixels: Vec<T>,
}

impl<T: Real> GrayImage<T> {
    /// Builds an image from row-major pixels, validating the `[0, 1]` range.
    pub fn from_vec(rows: usize, cols: usize, pixels: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::arg("image dimensions must be at least 1x1"));
        }
        if pixels.len() != rows * cols {
            return Err(Error::arg(format!(
                "pixel buffer length {} does not match {}x{}",
                pixels.len(),
                rows,
                cols
            )));
        }
        if pixels.iter().any(|p| !p.is_finite() || *p < T::zero() || *p > T::one()) {
            return Err(Error::arg("pixel intensities must lie in [0, 1]"));
        }
        Ok(Self { rows, cols, levels: DEFAULT_LEVELS, pixels })
    }

    /// Builds an image by evaluating `f(row, col)`, clamping into `[0, 1]`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut pixels = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                pixels.push(clamp_unit(f(r, c)));
            }
        }
        Self { rows, cols, levels: DEFAULT_LEVELS, pixels }
    }

    pub fn with_levels(mut self, levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::arg("level count must be at least 2"));
        }
        self.levels = levels;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.pixels[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.pixels[row * self.cols..(row + 1) * self.cols]
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    /// Quantizes a pixel to its 8-bit export value (round half up).
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|p| {
                let v = (*p * real::<T>(255.0) + real::<T>(0.5)).floor();
                num_traits::cast::<T, u32>(v).unwrap_or(255).min(255) as u8
            })
            .collect()
    }
}

fn clamp_unit<T: Real>(v: T) -> T {
    if v.is_nan() {
        T::zero()
    } else {
        v.max(T::zero()).min(T::one())
    }
}

/// 256-bin (or `L`-bin) intensity count vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::arg("histogram needs at least 2 bins"));
        }
        let total = counts.iter().sum();
        Ok(Self { counts, total })
    }

    pub fn levels(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Cumulative distribution, `cdf[i] = sum(counts[0..=i]) / total`.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0u64;
        self.counts
            .iter()
            .map(|c| {
                acc += c;
                acc as f64 / self.total as f64
            })
            .collect()
    }
}

/// Bin index of a normalized pixel: `floor(p * (L - 1) + 0.5)`, clamped.
pub fn quantize_level<T: Real>(pixel: T, levels: usize) -> usize {
    let scaled = pixel * real::<T>((levels - 1) as f64) + real::<T>(0.5);
    let idx = num_traits::cast::<T, i64>(scaled.floor()).unwrap_or(0);
    idx.clamp(0, (levels - 1) as i64) as usize
}

/// Normalized intensity of a quantized level, `k / (L - 1)`.
pub fn level_to_real<T: Real>(level: usize, levels: usize) -> T {
    real::<T>(level as f64 / (levels - 1) as f64)
}

/// ITU-R BT.601 luma conversion, normalized to `[0, 1]`.
pub fn to_grayscale<T: Real>(img: &RgbImage) -> GrayImage<T> {
    let (wr, wg, wb) = (real::<T>(0.299), real::<T>(0.587), real::<T>(0.114));
    let inv = real::<T>(1.0 / 255.0);
    let pixels = img
        .pixels()
        .chunks_exact(3)
        .map(|p| {
            let v = (wr * real::<T>(p[0] as f64)
                + wg * real::<T>(p[1] as f64)
                + wb * real::<T>(p[2] as f64))
                * inv;
            clamp_unit(v)
        })
        .collect();
    GrayImage { rows: img.height(), cols: img.width(), levels: DEFAULT_LEVELS, pixels }
}

/// Bilinear resize to exactly `target_rows x target_cols`.
///
/// Sample positions are center-aligned, so resizing to the source dimensions
/// reproduces the input exactly.
pub fn resize<T: Real>(
    img: &GrayImage<T>,
    target_rows: usize,
    target_cols: usize,
) -> Result<GrayImage<T>> {
    if target_rows == 0 || target_cols == 0 {
        return Err(Error::arg("resize target dimensions must be at least 1"));
    }
    let row_scale = img.rows() as f64 / target_rows as f64;
    let col_scale = img.cols() as f64 / target_cols as f64;
    let mut pixels = Vec::with_capacity(target_rows * target_cols);
    for r in 0..target_rows {
        let sy = ((r as f64 + 0.5) * row_scale - 0.5).clamp(0.0, (img.rows() - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(img.rows() - 1);
        let fy = real::<T>(sy - y0 as f64);
        for c in 0..target_cols {
            let sx = ((c as f64 + 0.5) * col_scale - 0.5).clamp(0.0, (img.cols() - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(img.cols() - 1);
            let fx = real::<T>(sx - x0 as f64);
            let top = img.get(y0, x0) * (T::one() - fx) + img.get(y0, x1) * fx;
            let bot = img.get(y1, x0) * (T::one() - fx) + img.get(y1, x1) * fx;
            pixels.push(clamp_unit(top * (T::one() - fy) + bot * fy));
        }
    }
    Ok(GrayImage { rows: target_rows, cols: target_cols, levels: img.levels(), pixels })
}

/// Histogram of the image's quantized levels; the counts always sum to `p*q`.
pub fn histogram<T: Real>(img: &GrayImage<T>) -> Histogram {
    let mut counts = vec![0u64; img.levels()];
    for p in img.pixels() {
        counts[quantize_level(*p, img.levels())] += 1;
    }
    Histogram { counts, total: (img.rows() * img.cols()) as u64 }
}

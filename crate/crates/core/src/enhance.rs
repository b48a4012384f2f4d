//! Contrast correction of the test image: histogram specification against the
//! reference histogram, then median-mean based sub-image clipped histogram
//! equalization (MMSICHE).

use crate::error::{Error, Result};
use crate::image::{histogram, level_to_real, quantize_level, GrayImage, Histogram};
use crate::scalar::{real, Real};

/// Median gray level and the count-weighted means of the two histogram halves.
///
/// Invariant: `x_ml <= x_e <= x_mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MedianSplit {
    pub x_e: usize,
    pub x_ml: usize,
    pub x_mu: usize,
}

/// Histogram with bin counts capped at a clipping threshold.
///
/// Counts are real-valued: the threshold is the median of the occupied bin
/// counts, which falls between two integers when their number is even.
#[derive(Debug, Clone, PartialEq)]
pub struct ClippedHistogram<T> {
    counts: Vec<T>,
    threshold: T,
}

impl<T: Real> ClippedHistogram<T> {
    pub fn counts(&self) -> &[T] {
        &self.counts
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }
}

/// The four gray-level ranges MMSICHE equalizes independently, with the
/// clipped pixel mass of each.
#[derive(Debug, Clone, PartialEq)]
pub struct SubHistogramPartition<T> {
    /// Inclusive level ranges; empty ranges are encoded as `lo > hi`.
    pub ranges: [(usize, usize); 4],
    pub totals: [T; 4],
}

/// Remaps the test image so its histogram approximates the reference one.
///
/// Standard inverse-CDF matching: input level `i` maps to the smallest level
/// `z` whose reference CDF is at least the test CDF at `i`.
pub fn histogram_specification<T: Real>(
    test: &GrayImage<T>,
    ref_hist: &Histogram,
) -> Result<GrayImage<T>> {
    if ref_hist.total() == 0 {
        return Err(Error::arg("reference histogram is empty"));
    }
    if ref_hist.levels() != test.levels() {
        return Err(Error::arg(format!(
            "reference histogram has {} bins but the test image quantizes to {}",
            ref_hist.levels(),
            test.levels()
        )));
    }
    let levels = test.levels();
    let test_cdf = histogram(test).cdf();
    let ref_cdf = ref_hist.cdf();

    // Two-pointer sweep: both CDFs are non-decreasing, so the smallest
    // admissible z never moves backwards.
    let mut lut = vec![0usize; levels];
    let mut z = 0usize;
    for (i, t) in test_cdf.iter().enumerate() {
        while z + 1 < levels && ref_cdf[z] < *t {
            z += 1;
        }
        lut[i] = z;
    }
    Ok(remap(test, &lut))
}

/// Smallest level with CDF >= 0.5 plus the weighted mean levels of the lower
/// and upper histogram halves (floored). An empty upper half degenerates to
/// `x_mu = x_e`.
pub fn median_split(hist: &Histogram) -> Result<MedianSplit> {
    if hist.total() == 0 {
        return Err(Error::arg("histogram is empty"));
    }
    let half = hist.total() as f64 / 2.0;
    let mut acc = 0u64;
    let mut x_e = hist.levels() - 1;
    for (i, &c) in hist.counts().iter().enumerate() {
        acc += c;
        if acc as f64 >= half {
            x_e = i;
            break;
        }
    }
    let weighted_floor = |lo: usize, hi: usize| -> Option<usize> {
        let mut mass = 0u64;
        let mut moment = 0u128;
        for i in lo..=hi {
            let c = hist.counts()[i];
            mass += c;
            moment += c as u128 * i as u128;
        }
        (mass > 0).then(|| (moment / mass as u128) as usize)
    };
    let x_ml = weighted_floor(0, x_e).unwrap_or(x_e);
    let x_mu = if x_e + 1 < hist.levels() {
        weighted_floor(x_e + 1, hist.levels() - 1).unwrap_or(x_e)
    } else {
        x_e
    };
    Ok(MedianSplit { x_e, x_ml, x_mu })
}

/// Caps each bin at the median of the non-zero bin counts.
pub fn clip_histogram<T: Real>(hist: &Histogram) -> Result<ClippedHistogram<T>> {
    if hist.total() == 0 {
        return Err(Error::arg("histogram is empty"));
    }
    let mut occupied: Vec<u64> = hist.counts().iter().copied().filter(|&c| c > 0).collect();
    occupied.sort_unstable();
    let m = occupied.len();
    let threshold = if m % 2 == 1 {
        real::<T>(occupied[m / 2] as f64)
    } else {
        real::<T>((occupied[m / 2 - 1] + occupied[m / 2]) as f64 / 2.0)
    };
    let counts = hist
        .counts()
        .iter()
        .map(|&c| real::<T>(c as f64).min(threshold))
        .collect();
    Ok(ClippedHistogram { counts, threshold })
}

/// Partitions `[0, L-1]` at the median split into the four MMSICHE ranges and
/// sums the clipped mass of each.
pub fn partition<T: Real>(
    split: &MedianSplit,
    clipped: &ClippedHistogram<T>,
    levels: usize,
) -> SubHistogramPartition<T> {
    let top = levels - 1;
    let ranges = [
        (0, split.x_ml),
        (split.x_ml + 1, split.x_e.min(top)),
        (split.x_e + 1, split.x_mu.min(top)),
        (split.x_mu + 1, top),
    ];
    let totals = ranges.map(|(lo, hi)| {
        if lo > hi {
            T::zero()
        } else {
            clipped.counts()[lo..=hi].iter().copied().sum()
        }
    });
    SubHistogramPartition { ranges, totals }
}

/// Equalization transfer for one sub-range: level `k` in `[lo, hi]` maps to
/// `lo + (hi - lo) * cumsum(H_c, lo..=k) / total`, rounded half up.
pub(crate) fn range_transfer<T: Real>(
    clipped: &[T],
    lo: usize,
    hi: usize,
    lut: &mut [usize],
) {
    if lo > hi {
        return;
    }
    let total: T = clipped[lo..=hi].iter().copied().sum();
    if total <= T::zero() {
        return; // empty sub-range keeps the identity mapping
    }
    let span = real::<T>((hi - lo) as f64);
    let base = real::<T>(lo as f64);
    let mut acc = T::zero();
    for k in lo..=hi {
        acc += clipped[k];
        let target = base + span * (acc / total) + real::<T>(0.5);
        lut[k] = num_traits::cast::<T, i64>(target.floor())
            .unwrap_or(lo as i64)
            .clamp(lo as i64, hi as i64) as usize;
    }
}

/// MMSICHE equalization: clips the image's own histogram, partitions it at
/// the median and half-means, and equalizes each range onto itself.
pub fn mmsiche<T: Real>(img: &GrayImage<T>) -> Result<GrayImage<T>> {
    let hist = histogram(img);
    let split = median_split(&hist)?;
    let clipped = clip_histogram::<T>(&hist)?;
    let part = partition(&split, &clipped, img.levels());

    let mut lut: Vec<usize> = (0..img.levels()).collect();
    for (lo, hi) in part.ranges {
        if lo <= hi {
            range_transfer(clipped.counts(), lo, hi, &mut lut);
        }
    }
    Ok(remap(img, &lut))
}

fn remap<T: Real>(img: &GrayImage<T>, lut: &[usize]) -> GrayImage<T> {
    let levels = img.levels();
    let out = GrayImage::from_fn(img.rows(), img.cols(), |r, c| {
        level_to_real(lut[quantize_level(img.get(r, c), levels)], levels)
    });
    out.with_levels(levels).expect("levels already validated")
}

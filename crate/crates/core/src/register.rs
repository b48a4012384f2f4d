//! Affine registration of the enhanced test image onto the reference grid:
//! Harris corners, normalized cross-correlation matching, seeded RANSAC with
//! least-squares refinement, and bilinear warping.
//!
//! Points are `(x, y) = (column, row)` throughout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::linalg::solve3;
use crate::mask::BinaryMask;
use crate::scalar::{real, Real};

/// Six-degree-of-freedom affine map from reference to test coordinates:
/// `(x', y') = A (x, y) + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform<T> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
    pub tx: T,
    pub ty: T,
}

impl<T: Real> AffineTransform<T> {
    pub fn identity() -> Self {
        Self {
            a11: T::one(),
            a12: T::zero(),
            a21: T::zero(),
            a22: T::one(),
            tx: T::zero(),
            ty: T::zero(),
        }
    }

    pub fn translation(tx: T, ty: T) -> Self {
        Self { tx, ty, ..Self::identity() }
    }

    pub fn apply(&self, x: T, y: T) -> (T, T) {
        (
            self.a11 * x + self.a12 * y + self.tx,
            self.a21 * x + self.a22 * y + self.ty,
        )
    }

    pub fn det(&self) -> T {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.abs() < real::<T>(1e-12) {
            return Err(Error::arg("affine transform is singular"));
        }
        let (b11, b12) = (self.a22 / det, -self.a12 / det);
        let (b21, b22) = (-self.a21 / det, self.a11 / det);
        Ok(Self {
            a11: b11,
            a12: b12,
            a21: b21,
            a22: b22,
            tx: -(b11 * self.tx + b12 * self.ty),
            ty: -(b21 * self.tx + b22 * self.ty),
        })
    }
}

/// A matched point pair with its normalized-cross-correlation score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence<T> {
    /// (x, y) in the reference image.
    pub reference: (T, T),
    /// (x', y') in the test image.
    pub test: (T, T),
    pub score: T,
}

/// Harris corner with its response value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner<T> {
    pub row: usize,
    pub col: usize,
    pub response: T,
}

/// RANSAC parameters for [`estimate_affine`]; a fixed seed makes the result
/// bit-deterministic across runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacParams {
    pub seed: u64,
    pub iterations: usize,
    pub inlier_radius: f64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self { seed: 42, iterations: 1000, inlier_radius: 2.0 }
    }
}

const HARRIS_K: f64 = 0.04;
const RESPONSE_FLOOR: f64 = 1e-9;
const NMS_RADIUS: usize = 5;
const PATCH_RADIUS: usize = 5;
const SEARCH_RADIUS: usize = 32;
const MIN_NCC: f64 = 0.7;

/// Harris corner detection with non-maximum suppression within a 5 px radius.
///
/// Returned corners are ordered by descending response with (row, col) ties
/// broken lexicographically, truncated to `max_corners`.
pub fn detect_corners<T: Real>(img: &GrayImage<T>, max_corners: usize) -> Result<Vec<Corner<T>>> {
    let (p, q) = (img.rows(), img.cols());
    if p < 16 || q < 16 {
        return Err(Error::arg("corner detection needs at least a 16x16 image"));
    }
    let mut gxx = vec![T::zero(); p * q];
    let mut gxy = vec![T::zero(); p * q];
    let mut gyy = vec![T::zero(); p * q];
    let eighth = real::<T>(1.0 / 8.0);
    for r in 1..p - 1 {
        for c in 1..q - 1 {
            let gx = (img.get(r - 1, c + 1) + real::<T>(2.0) * img.get(r, c + 1)
                + img.get(r + 1, c + 1)
                - img.get(r - 1, c - 1)
                - real::<T>(2.0) * img.get(r, c - 1)
                - img.get(r + 1, c - 1))
                * eighth;
            let gy = (img.get(r + 1, c - 1) + real::<T>(2.0) * img.get(r + 1, c)
                + img.get(r + 1, c + 1)
                - img.get(r - 1, c - 1)
                - real::<T>(2.0) * img.get(r - 1, c)
                - img.get(r - 1, c + 1))
                * eighth;
            let i = r * q + c;
            gxx[i] = gx * gx;
            gxy[i] = gx * gy;
            gyy[i] = gy * gy;
        }
    }

    // 5x5 box sums via two separable passes.
    let window = |m: &[T]| -> Vec<T> {
        let mut tmp = vec![T::zero(); p * q];
        for r in 0..p {
            for c in 2..q - 2 {
                let mut acc = T::zero();
                for dc in 0..5 {
                    acc += m[r * q + c + dc - 2];
                }
                tmp[r * q + c] = acc;
            }
        }
        let mut out = vec![T::zero(); p * q];
        for r in 2..p - 2 {
            for c in 0..q {
                let mut acc = T::zero();
                for dr in 0..5 {
                    acc += tmp[(r + dr - 2) * q + c];
                }
                out[r * q + c] = acc;
            }
        }
        out
    };
    let sxx = window(&gxx);
    let sxy = window(&gxy);
    let syy = window(&gyy);

    let mut response = vec![T::zero(); p * q];
    let k = real::<T>(HARRIS_K);
    for r in 3..p - 3 {
        for c in 3..q - 3 {
            let i = r * q + c;
            let (a, b, d) = (sxx[i], sxy[i], syy[i]);
            response[i] = a * d - b * b - k * (a + d) * (a + d);
        }
    }

    // Non-maximum suppression: drop pixels with a strictly greater neighbor
    // within the radius, then collapse each equal-value connected plateau of
    // survivors to its lexicographically first pixel.
    let floor = real::<T>(RESPONSE_FLOOR);
    let mut survives = vec![false; p * q];
    for r in 3..p - 3 {
        'candidate: for c in 3..q - 3 {
            let v = response[r * q + c];
            if v <= floor {
                continue;
            }
            let r_lo = r.saturating_sub(NMS_RADIUS);
            let r_hi = (r + NMS_RADIUS).min(p - 1);
            let c_lo = c.saturating_sub(NMS_RADIUS);
            let c_hi = (c + NMS_RADIUS).min(q - 1);
            for nr in r_lo..=r_hi {
                for nc in c_lo..=c_hi {
                    if response[nr * q + nc] > v {
                        continue 'candidate;
                    }
                }
            }
            survives[r * q + c] = true;
        }
    }
    let mut corners = Vec::new();
    let mut visited = vec![false; p * q];
    for r in 0..p {
        for c in 0..q {
            let i = r * q + c;
            if !survives[i] || visited[i] {
                continue;
            }
            // Scan order is lexicographic, so the component entry point is
            // its lex-min; flood the plateau to mark the rest visited.
            let v = response[i];
            corners.push(Corner { row: r, col: c, response: v });
            let mut stack = vec![(r, c)];
            visited[i] = true;
            while let Some((cr, cc)) = stack.pop() {
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let (nr, nc) = (cr as i64 + dr, cc as i64 + dc);
                        if nr < 0 || nr >= p as i64 || nc < 0 || nc >= q as i64 {
                            continue;
                        }
                        let ni = nr as usize * q + nc as usize;
                        if survives[ni] && !visited[ni] && response[ni] == v {
                            visited[ni] = true;
                            stack.push((nr as usize, nc as usize));
                        }
                    }
                }
            }
        }
    }
    corners.sort_by(|a, b| {
        b.response
            .partial_cmp(&a.response)
            .expect("responses are finite")
            .then_with(|| (a.row, a.col).cmp(&(b.row, b.col)))
    });
    corners.truncate(max_corners);
    Ok(corners)
}

/// For each reference corner, the best NCC match of its 11x11 patch within a
/// 32 px search window in the test image; pairs scoring below 0.7 are dropped.
pub fn match_correspondences<T: Real>(
    reference: &GrayImage<T>,
    test: &GrayImage<T>,
    corners: &[Corner<T>],
) -> Result<Vec<Correspondence<T>>> {
    if reference.rows() != test.rows() || reference.cols() != test.cols() {
        return Err(Error::arg("reference and test dimensions differ"));
    }
    let (p, q) = (reference.rows(), reference.cols());
    let rad = PATCH_RADIUS;
    let patch_side = 2 * rad + 1;
    let patch_len = patch_side * patch_side;

    let centered_patch = |img: &GrayImage<T>, row: usize, col: usize| -> Option<(Vec<T>, T)> {
        let mut vals = Vec::with_capacity(patch_len);
        for dr in 0..patch_side {
            for dc in 0..patch_side {
                vals.push(img.get(row + dr - rad, col + dc - rad));
            }
        }
        let mean = vals.iter().copied().sum::<T>() / real::<T>(patch_len as f64);
        let mut norm2 = T::zero();
        for v in vals.iter_mut() {
            *v = *v - mean;
            norm2 += *v * *v;
        }
        (norm2 > real::<T>(1e-12)).then(|| (vals, norm2.sqrt()))
    };

    let matches: Vec<Option<Correspondence<T>>> = corners
        .par_iter()
        .map(|corner| {
            let (row, col) = (corner.row, corner.col);
            if row < rad || row + rad >= p || col < rad || col + rad >= q {
                return None;
            }
            let (ref_patch, ref_norm) = centered_patch(reference, row, col)?;
            let mut best: Option<(T, usize, usize)> = None;
            let r_lo = row.saturating_sub(SEARCH_RADIUS).max(rad);
            let r_hi = (row + SEARCH_RADIUS).min(p - 1 - rad);
            let c_lo = col.saturating_sub(SEARCH_RADIUS).max(rad);
            let c_hi = (col + SEARCH_RADIUS).min(q - 1 - rad);
            for tr in r_lo..=r_hi {
                for tc in c_lo..=c_hi {
                    if let Some((test_patch, test_norm)) = centered_patch(test, tr, tc) {
                        let mut dot = T::zero();
                        for (a, b) in ref_patch.iter().zip(&test_patch) {
                            dot += *a * *b;
                        }
                        let ncc = dot / (ref_norm * test_norm);
                        if best.map_or(true, |(s, _, _)| ncc > s) {
                            best = Some((ncc, tr, tc));
                        }
                    }
                }
            }
            best.filter(|(s, _, _)| *s >= real::<T>(MIN_NCC)).map(|(s, tr, tc)| Correspondence {
                reference: (real::<T>(col as f64), real::<T>(row as f64)),
                test: (real::<T>(tc as f64), real::<T>(tr as f64)),
                score: s.min(T::one()),
            })
        })
        .collect();
    Ok(matches.into_iter().flatten().collect())
}

/// Formats correspondences as `rx,ry,tx,ty,score` CSV lines (debug dump).
pub fn correspondences_csv<T: Real>(pairs: &[Correspondence<T>]) -> String {
    let mut out = String::from("rx,ry,tx,ty,score\n");
    for pair in pairs {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            pair.reference.0, pair.reference.1, pair.test.0, pair.test.1, pair.score
        ));
    }
    out
}

fn exact_affine<T: Real>(pairs: [&Correspondence<T>; 3]) -> Option<AffineTransform<T>> {
    let m = [
        [pairs[0].reference.0, pairs[0].reference.1, T::one()],
        [pairs[1].reference.0, pairs[1].reference.1, T::one()],
        [pairs[2].reference.0, pairs[2].reference.1, T::one()],
    ];
    let xs = solve3(m, [pairs[0].test.0, pairs[1].test.0, pairs[2].test.0])?;
    let ys = solve3(m, [pairs[0].test.1, pairs[1].test.1, pairs[2].test.1])?;
    Some(AffineTransform { a11: xs[0], a12: xs[1], tx: xs[2], a21: ys[0], a22: ys[1], ty: ys[2] })
}

fn least_squares_fit<T: Real>(pairs: &[&Correspondence<T>]) -> Option<AffineTransform<T>> {
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    let mut sx = T::zero();
    let mut sy = T::zero();
    let n = real::<T>(pairs.len() as f64);
    let mut bx = [T::zero(); 3];
    let mut by = [T::zero(); 3];
    for pair in pairs {
        let (x, y) = pair.reference;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sx += x;
        sy += y;
        bx[0] += x * pair.test.0;
        bx[1] += y * pair.test.0;
        bx[2] += pair.test.0;
        by[0] += x * pair.test.1;
        by[1] += y * pair.test.1;
        by[2] += pair.test.1;
    }
    let normal = [[sxx, sxy, sx], [sxy, syy, sy], [sx, sy, n]];
    let xs = solve3(normal, bx)?;
    let ys = solve3(normal, by)?;
    Some(AffineTransform { a11: xs[0], a12: xs[1], tx: xs[2], a21: ys[0], a22: ys[1], ty: ys[2] })
}

/// Seeded RANSAC over 3-pair samples followed by a least-squares refit over
/// the consensus inlier set.
pub fn estimate_affine<T: Real>(
    pairs: &[Correspondence<T>],
    params: &RansacParams,
) -> Result<AffineTransform<T>> {
    if pairs.len() < 3 {
        return Err(Error::Estimation(format!(
            "need at least 3 correspondences, have {}",
            pairs.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let radius2 = real::<T>(params.inlier_radius * params.inlier_radius);
    let mut best: Option<(usize, AffineTransform<T>)> = None;
    for _ in 0..params.iterations {
        let mut idx = [0usize; 3];
        idx[0] = rng.random_range(0..pairs.len());
        loop {
            idx[1] = rng.random_range(0..pairs.len());
            if idx[1] != idx[0] {
                break;
            }
        }
        loop {
            idx[2] = rng.random_range(0..pairs.len());
            if idx[2] != idx[0] && idx[2] != idx[1] {
                break;
            }
        }
        let Some(candidate) = exact_affine([&pairs[idx[0]], &pairs[idx[1]], &pairs[idx[2]]])
        else {
            continue; // degenerate (collinear) sample
        };
        let inliers = pairs
            .iter()
            .filter(|pair| {
                let (px, py) = candidate.apply(pair.reference.0, pair.reference.1);
                let (dx, dy) = (px - pair.test.0, py - pair.test.1);
                dx * dx + dy * dy <= radius2
            })
            .count();
        if best.as_ref().map_or(true, |(n, _)| inliers > *n) {
            best = Some((inliers, candidate));
        }
    }
    let (_, sample_fit) = best.ok_or_else(|| {
        Error::Estimation("all RANSAC samples were degenerate".into())
    })?;
    let inliers: Vec<&Correspondence<T>> = pairs
        .iter()
        .filter(|pair| {
            let (px, py) = sample_fit.apply(pair.reference.0, pair.reference.1);
            let (dx, dy) = (px - pair.test.0, py - pair.test.1);
            dx * dx + dy * dy <= radius2
        })
        .collect();
    let refined = if inliers.len() >= 3 {
        least_squares_fit(&inliers).unwrap_or(sample_fit)
    } else {
        sample_fit
    };
    if refined.det().abs() < real::<T>(1e-12) {
        return Err(Error::Estimation("estimated transform is singular".into()));
    }
    Ok(refined)
}

fn sample_bilinear<T: Real>(img: &GrayImage<T>, x: T, y: T) -> T {
    let max_x = real::<T>((img.cols() - 1) as f64);
    let max_y = real::<T>((img.rows() - 1) as f64);
    if x < T::zero() || x > max_x || y < T::zero() || y > max_y {
        return T::zero();
    }
    let x0f = x.floor();
    let y0f = y.floor();
    let x0 = num_traits::cast::<T, usize>(x0f).unwrap_or(0);
    let y0 = num_traits::cast::<T, usize>(y0f).unwrap_or(0);
    let x1 = (x0 + 1).min(img.cols() - 1);
    let y1 = (y0 + 1).min(img.rows() - 1);
    let fx = x - x0f;
    let fy = y - y0f;
    let top = img.get(y0, x0) * (T::one() - fx) + img.get(y0, x1) * fx;
    let bot = img.get(y1, x0) * (T::one() - fx) + img.get(y1, x1) * fx;
    top * (T::one() - fy) + bot * fy
}

/// Resamples the test image onto the reference grid: output(x, y) is the
/// bilinear sample of `test` at `T(x, y)`, zero outside the test bounds.
pub fn warp_image<T: Real>(test: &GrayImage<T>, t: &AffineTransform<T>) -> Result<GrayImage<T>> {
    Ok(warp_with_footprint(test, t, 0.0)?.0)
}

/// Like [`warp_image`], also reporting which output pixels sampled at least
/// `erode_px` inside the test bounds (an exact convexity test on the affine
/// image of the pixel's `erode_px` square).
pub fn warp_with_footprint<T: Real>(
    test: &GrayImage<T>,
    t: &AffineTransform<T>,
    erode_px: f64,
) -> Result<(GrayImage<T>, BinaryMask)> {
    if t.det().abs() < real::<T>(1e-12) {
        return Err(Error::arg("affine transform is singular"));
    }
    let (p, q) = (test.rows(), test.cols());
    let e = real::<T>(erode_px);
    let max_x = real::<T>((q - 1) as f64);
    let max_y = real::<T>((p - 1) as f64);
    let rows: Vec<(Vec<T>, Vec<bool>)> = (0..p)
        .into_par_iter()
        .map(|r| {
            let y = real::<T>(r as f64);
            let mut vals = Vec::with_capacity(q);
            let mut valid = Vec::with_capacity(q);
            for c in 0..q {
                let x = real::<T>(c as f64);
                let (sx, sy) = t.apply(x, y);
                vals.push(sample_bilinear(test, sx, sy));
                let inside = [(-e, -e), (e, -e), (-e, e), (e, e)].iter().all(|&(dx, dy)| {
                    let (cx, cy) = t.apply(x + dx, y + dy);
                    cx >= T::zero() && cx <= max_x && cy >= T::zero() && cy <= max_y
                });
                valid.push(inside);
            }
            (vals, valid)
        })
        .collect();
    let mut pixels = Vec::with_capacity(p * q);
    let mut mask = BinaryMask::new(p, q);
    for (r, (vals, valid)) in rows.into_iter().enumerate() {
        pixels.extend(vals);
        for (c, v) in valid.into_iter().enumerate() {
            mask.set(r, c, v);
        }
    }
    let img = GrayImage::from_vec(p, q, pixels)?.with_levels(test.levels())?;
    Ok((img, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn noise_image(rows: usize, cols: usize, seed: u64) -> GrayImage<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pixels = (0..rows * cols).map(|_| rng.random_range(0.0..1.0)).collect();
        GrayImage::from_vec(rows, cols, pixels).unwrap()
    }

    #[test]
    fn constant_image_has_no_corners() {
        let img = GrayImage::<f64>::from_fn(32, 32, |_, _| 0.6);
        assert!(detect_corners(&img, 10).unwrap().is_empty());
    }

    #[test]
    fn small_image_is_rejected() {
        let img = GrayImage::<f64>::from_fn(8, 8, |_, _| 0.0);
        assert!(detect_corners(&img, 10).is_err());
    }

    #[test]
    fn isolated_bright_pixel_yields_nearby_corner() {
        let img = GrayImage::<f64>::from_fn(32, 32, |r, c| {
            if (r, c) == (16, 16) { 1.0 } else { 0.0 }
        });
        let corners = detect_corners(&img, 10).unwrap();
        assert!(!corners.is_empty());
        assert!(corners
            .iter()
            .any(|k| k.row.abs_diff(16) <= 2 && k.col.abs_diff(16) <= 2));
    }

    #[test]
    fn checkerboard_corners_sit_on_interior_junctions() {
        let img = GrayImage::<f64>::from_fn(32, 32, |r, c| {
            if ((r / 8) + (c / 8)) % 2 == 0 { 1.0 } else { 0.0 }
        });
        let corners = detect_corners(&img, 20).unwrap();
        assert_eq!(corners.len(), 9, "expected one corner per interior junction");
        for k in &corners {
            let near = [8usize, 16, 24]
                .iter()
                .any(|&a| k.row.abs_diff(a) <= 2)
                && [8usize, 16, 24].iter().any(|&a| k.col.abs_diff(a) <= 2);
            assert!(near, "corner at ({}, {}) off-junction", k.row, k.col);
        }
    }

    #[test]
    fn self_match_is_perfect() {
        let img = noise_image(64, 64, 5);
        let corners = detect_corners(&img, 12).unwrap();
        assert!(!corners.is_empty());
        let pairs = match_correspondences(&img, &img, &corners).unwrap();
        // Corners too close to the border for an 11x11 patch are skipped.
        let with_patch = corners
            .iter()
            .filter(|k| k.row >= 5 && k.row < 59 && k.col >= 5 && k.col < 59)
            .count();
        assert_eq!(pairs.len(), with_patch);
        assert!(!pairs.is_empty());
        for pair in &pairs {
            assert_eq!(pair.reference, pair.test);
            assert_relative_eq!(pair.score, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn shifted_image_matches_with_uniform_offset() {
        let img = noise_image(64, 64, 9);
        let shifted = GrayImage::<f64>::from_fn(64, 64, |r, c| {
            if c >= 3 { img.get(r, c - 3) } else { 0.0 }
        });
        let corners = detect_corners(&img, 12).unwrap();
        let pairs = match_correspondences(&img, &shifted, &corners).unwrap();
        assert!(!pairs.is_empty());
        for pair in &pairs {
            assert_relative_eq!(pair.test.0 - pair.reference.0, 3.0, epsilon = 1e-12);
            assert_relative_eq!(pair.test.1 - pair.reference.1, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn inverted_image_yields_no_matches() {
        let img = noise_image(64, 64, 13);
        let inverted = GrayImage::<f64>::from_fn(64, 64, |r, c| 1.0 - img.get(r, c));
        let corners = detect_corners(&img, 12).unwrap();
        let pairs = match_correspondences(&img, &inverted, &corners).unwrap();
        assert!(pairs.is_empty());
    }

    fn pairs_from_transform(t: &AffineTransform<f64>, n: usize, seed: u64) -> Vec<Correspondence<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let x = rng.random_range(0.0..100.0);
                let y = rng.random_range(0.0..100.0);
                let (tx, ty) = t.apply(x, y);
                Correspondence { reference: (x, y), test: (tx, ty), score: 1.0 }
            })
            .collect()
    }

    #[test]
    fn identity_pairs_recover_identity() {
        let pairs = pairs_from_transform(&AffineTransform::identity(), 12, 3);
        let t = estimate_affine(&pairs, &RansacParams::default()).unwrap();
        assert_relative_eq!(t.a11, 1.0, epsilon = 1e-9);
        assert_relative_eq!(t.a22, 1.0, epsilon = 1e-9);
        assert_relative_eq!(t.a12, 0.0, epsilon = 1e-9);
        assert_relative_eq!(t.a21, 0.0, epsilon = 1e-9);
        assert_relative_eq!(t.tx, 0.0, epsilon = 1e-9);
        assert_relative_eq!(t.ty, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn three_translated_pairs_force_translation() {
        let pairs = vec![
            Correspondence { reference: (0.0, 0.0), test: (2.0, 3.0), score: 1.0 },
            Correspondence { reference: (1.0, 0.0), test: (3.0, 3.0), score: 1.0 },
            Correspondence { reference: (0.0, 1.0), test: (2.0, 4.0), score: 1.0 },
        ];
        let t = estimate_affine(&pairs, &RansacParams::default()).unwrap();
        assert_relative_eq!(t.a11, 1.0, epsilon = 1e-9);
        assert_relative_eq!(t.a12, 0.0, epsilon = 1e-9);
        assert_relative_eq!(t.a21, 0.0, epsilon = 1e-9);
        assert_relative_eq!(t.a22, 1.0, epsilon = 1e-9);
        assert_relative_eq!(t.tx, 2.0, epsilon = 1e-9);
        assert_relative_eq!(t.ty, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn scaled_pairs_force_pure_scaling() {
        let scale = AffineTransform { a11: 2.0, a12: 0.0, a21: 0.0, a22: 2.0, tx: 0.0, ty: 0.0 };
        let pairs = pairs_from_transform(&scale, 8, 4);
        let t = estimate_affine(&pairs, &RansacParams::default()).unwrap();
        assert_relative_eq!(t.a11, 2.0, epsilon = 1e-9);
        assert_relative_eq!(t.a22, 2.0, epsilon = 1e-9);
        assert_relative_eq!(t.a12, 0.0, epsilon = 1e-9);
        assert_relative_eq!(t.a21, 0.0, epsilon = 1e-9);
        assert_relative_eq!(t.tx.abs() + t.ty.abs(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn too_few_pairs_is_an_error() {
        let pairs = pairs_from_transform(&AffineTransform::identity(), 2, 6);
        assert!(estimate_affine(&pairs, &RansacParams::default()).is_err());
    }

    #[test]
    fn ransac_is_deterministic_for_a_fixed_seed() {
        let truth = AffineTransform { a11: 1.02, a12: -0.05, a21: 0.04, a22: 0.98, tx: 4.0, ty: -7.0 };
        let mut pairs = pairs_from_transform(&truth, 40, 7);
        // 30% outliers
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for pair in pairs.iter_mut().take(12) {
            pair.test = (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
        }
        let params = RansacParams::default();
        let a = estimate_affine(&pairs, &params).unwrap();
        let b = estimate_affine(&pairs, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn warp_identity_is_identity() {
        let img = noise_image(20, 30, 21);
        let out = warp_image(&img, &AffineTransform::identity()).unwrap();
        assert_eq!(out.pixels(), img.pixels());
    }

    #[test]
    fn integer_translation_shifts_exactly() {
        let img = noise_image(16, 16, 8);
        let t = AffineTransform::translation(3.0, 0.0);
        let out = warp_image(&img, &t).unwrap();
        for r in 0..16 {
            for c in 0..16 {
                let expect = if c + 3 < 16 { img.get(r, c + 3) } else { 0.0 };
                assert_eq!(out.get(r, c), expect, "at ({r}, {c})");
            }
        }
    }

    #[test]
    fn warp_and_inverse_warp_round_trip_smoothly() {
        let img = GrayImage::<f64>::from_fn(64, 64, |r, c| {
            0.5 + 0.45 * ((r as f64 * 0.11).sin() * (c as f64 * 0.13).cos())
        });
        let t = AffineTransform { a11: 1.01, a12: 0.02, a21: -0.015, a22: 0.99, tx: 1.3, ty: -0.8 };
        let fwd = warp_image(&img, &t).unwrap();
        let back = warp_image(&fwd, &t.inverse().unwrap()).unwrap();
        let mut se = 0.0;
        let mut n = 0usize;
        for r in 4..60 {
            for c in 4..60 {
                let d = back.get(r, c) - img.get(r, c);
                se += d * d;
                n += 1;
            }
        }
        let rms = (se / n as f64).sqrt();
        assert!(rms <= 0.02, "round-trip rms = {rms}");
    }

    #[test]
    fn footprint_erosion_marks_border_invalid() {
        let img = noise_image(32, 32, 2);
        let t = AffineTransform::translation(2.0, 0.0);
        let (_, mask) = warp_with_footprint(&img, &t, 3.0).unwrap();
        assert!(!mask.get(16, 31));
        assert!(!mask.get(0, 16));
        assert!(mask.get(16, 16));
    }

    #[test]
    fn warp_rejects_singular_transform() {
        let img = noise_image(16, 16, 1);
        let t = AffineTransform { a11: 1.0, a12: 1.0, a21: 1.0, a22: 1.0, tx: 0.0, ty: 0.0 };
        assert!(warp_image(&img, &t).is_err());
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let pairs = vec![Correspondence { reference: (1.0, 2.0), test: (3.0, 4.0), score: 0.9 }];
        let csv = correspondences_csv(&pairs);
        assert!(csv.starts_with("rx,ry,tx,ty,score\n"));
        assert!(csv.contains("1,2,3,4,0.9"));
    }
}

//! Tile-wise similarity from the numerical rank of the Sylvester matrix of
//! two tiles' characteristic polynomials.
//!
//! Identical tiles share a characteristic polynomial, so the 2n x 2n Sylvester
//! matrix drops to rank n; coprime polynomials give full rank 2n. The per-tile
//! intensity `clamp((r - n) / n, 0, 1)` is therefore 0 for similar tiles and 1
//! for maximally dissimilar ones.

use std::io::Write;

use rayon::prelude::*;

use crate::edgefilter::EdgeImage;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::linalg::{singular_values, DenseMatrix};
use crate::mask::BinaryMask;
use crate::scalar::{real, Real};

/// Maximum supported characteristic-polynomial size.
pub const MAX_CHARPOLY_DIM: usize = 16;

/// Characteristic polynomial coefficients, leading-first (`c_0` is the
/// coefficient of `lambda^n`). Monic before normalization; unit Euclidean
/// norm after.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly<T> {
    coeffs: Vec<T>,
    normalized: bool,
}

impl<T: Real> CharPoly<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::arg("polynomial must have degree at least 1"));
        }
        if coeffs[0] == T::zero() {
            return Err(Error::arg("leading coefficient must be non-zero"));
        }
        Ok(Self { coeffs, normalized: false })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Scales the coefficient vector to unit Euclidean norm.
    pub fn normalized(mut self) -> Self {
        let norm = self.coeffs.iter().map(|c| *c * *c).sum::<T>().sqrt();
        if norm > T::zero() {
            for c in self.coeffs.iter_mut() {
                *c = *c / norm;
            }
        }
        self.normalized = true;
        self
    }

    /// Evaluates the polynomial at `x` (Horner).
    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, &c| acc * x + c)
    }
}

/// Monic characteristic polynomial of a square matrix by the
/// Faddeev-LeVerrier recurrence.
pub fn characteristic_polynomial<T: Real>(m: &DenseMatrix<T>) -> Result<CharPoly<T>> {
    if m.rows() != m.cols() {
        return Err(Error::arg(format!(
            "characteristic polynomial needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 || n > MAX_CHARPOLY_DIM {
        return Err(Error::arg(format!("matrix side must be in 1..={MAX_CHARPOLY_DIM}")));
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(T::one());
    // M_1 = M, c_k = -tr(M_k)/k, M_{k+1} = M (M_k + c_k I).
    let mut mk = m.clone();
    for k in 1..=n {
        let ck = -mk.trace() / real::<T>(k as f64);
        coeffs.push(ck);
        if k < n {
            let mut shifted = mk.clone();
            for i in 0..n {
                shifted.set(i, i, shifted.get(i, i) + ck);
            }
            mk = m.mul(&shifted);
        }
    }
    CharPoly::from_coeffs(coeffs)
}

/// The 2n x 2n Sylvester matrix `S = [E(P(C)) | F(P(D))]` of two degree-n
/// polynomials; each block column holds the coefficient vector shifted down.
#[derive(Debug, Clone, PartialEq)]
pub struct SylvesterMatrix<T> {
    degree: usize,
    data: Vec<T>,
}

impl<T: Real> SylvesterMatrix<T> {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn side(&self) -> usize {
        2 * self.degree
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.side() + c]
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_vec(self.side(), self.side(), self.data.clone())
            .expect("dimensions consistent by construction")
    }
}

/// Assembles the Sylvester matrix of two equal-degree polynomials.
pub fn build_sylvester<T: Real>(
    pc: &CharPoly<T>,
    pd: &CharPoly<T>,
) -> Result<SylvesterMatrix<T>> {
    let n = pc.degree();
    if n != pd.degree() {
        return Err(Error::arg(format!(
            "degree mismatch: {} vs {}",
            pc.degree(),
            pd.degree()
        )));
    }
    let side = 2 * n;
    let mut data = vec![T::zero(); side * side];
    for j in 0..n {
        for (k, &c) in pc.coeffs().iter().enumerate() {
            data[(j + k) * side + j] = c;
        }
        for (k, &d) in pd.coeffs().iter().enumerate() {
            data[(j + k) * side + (n + j)] = d;
        }
    }
    Ok(SylvesterMatrix { degree: n, data })
}

/// Number of singular values above `tol * sigma_max`; an all-zero matrix has
/// rank 0.
pub fn numerical_rank<T: Real>(s: &SylvesterMatrix<T>, tol: T) -> Result<usize> {
    if !(tol > T::zero() && tol < T::one()) {
        return Err(Error::arg("rank tolerance must lie in (0, 1)"));
    }
    let sv = singular_values(&s.to_dense());
    let sigma_max = sv.first().copied().unwrap_or_else(T::zero);
    if sigma_max <= T::zero() {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&v| v > tol * sigma_max).count())
}

/// Per-tile rank score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileScore<T> {
    pub tile_row: usize,
    pub tile_col: usize,
    pub rank: usize,
    pub intensity: T,
}

/// Tile grid of rank-derived defect intensities plus the per-pixel
/// visualization (maximum over covering tiles when tiles overlap).
#[derive(Debug, Clone, PartialEq)]
pub struct DefectMap<T> {
    tile_size: usize,
    stride: usize,
    rows: usize,
    cols: usize,
    tiles: Vec<TileScore<T>>,
    intensity: Vec<T>,
}

impl<T: Real> DefectMap<T> {
    pub fn tile_size(&self) -> usize {
        self.tile_size
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn tiles(&self) -> &[TileScore<T>] {
        &self.tiles
    }

    pub fn intensity_at(&self, r: usize, c: usize) -> T {
        self.intensity[r * self.cols + c]
    }

    /// Per-pixel intensity image (values already in `[0, 1]`).
    pub fn intensity_image(&self) -> GrayImage<T> {
        GrayImage::from_fn(self.rows, self.cols, |r, c| self.intensity_at(r, c))
    }

    /// Defect mask: pixels whose intensity meets `threshold`.
    pub fn binary_mask(&self, threshold: T) -> BinaryMask {
        BinaryMask::from_fn(self.rows, self.cols, |r, c| self.intensity_at(r, c) >= threshold)
    }

    /// Writes `tile_row,tile_col,rank,intensity` CSV lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tile_row,tile_col,rank,intensity")?;
        for t in &self.tiles {
            writeln!(w, "{},{},{},{}", t.tile_row, t.tile_col, t.rank, t.intensity)?;
        }
        Ok(())
    }
}

pub(crate) fn intensity_for_rank<T: Real>(rank: usize, degree: usize) -> T {
    let raw = (real::<T>(rank as f64) - real::<T>(degree as f64)) / real::<T>(degree as f64);
    raw.max(T::zero()).min(T::one())
}

fn tile_starts(extent: usize, tile: usize, stride: usize) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut s = 0usize;
    while s + tile <= extent {
        starts.push(s);
        s += stride;
    }
    // Keep the trailing band covered when the stride does not divide evenly.
    if let Some(&last) = starts.last() {
        if last + tile < extent {
            starts.push(extent - tile);
        }
    }
    starts
}

/// Compares co-located `w x w` tiles of two edge images and scores each by
/// Sylvester rank; tiles where both sub-images are all zero score 0 without
/// matrix work.
pub fn fault_map<T: Real>(
    ref_edges: &EdgeImage<T>,
    test_edges: &EdgeImage<T>,
    tile: usize,
    stride: usize,
    tol: T,
) -> Result<DefectMap<T>> {
    if ref_edges.rows() != test_edges.rows() || ref_edges.cols() != test_edges.cols() {
        return Err(Error::arg("edge image dimensions differ"));
    }
    let (p, q) = (ref_edges.rows(), ref_edges.cols());
    if tile < 2 || tile > 12 {
        return Err(Error::arg("tile size must lie in 2..=12"));
    }
    if tile > p || tile > q {
        return Err(Error::arg("tile size exceeds image dimensions"));
    }
    if stride == 0 {
        return Err(Error::arg("stride must be positive"));
    }
    if !(tol > T::zero() && tol < T::one()) {
        return Err(Error::arg("rank tolerance must lie in (0, 1)"));
    }

    let row_starts = tile_starts(p, tile, stride);
    let col_starts = tile_starts(q, tile, stride);
    let mut positions = Vec::with_capacity(row_starts.len() * col_starts.len());
    for &r in &row_starts {
        for &c in &col_starts {
            positions.push((r, c));
        }
    }

    let extract = |img: &EdgeImage<T>, r0: usize, c0: usize| {
        DenseMatrix::from_fn(tile, tile, |r, c| img.get(r0 + r, c0 + c))
    };

    let tiles: Vec<TileScore<T>> = positions
        .par_iter()
        .map(|&(r0, c0)| {
            let c_tile = extract(ref_edges, r0, c0);
            let d_tile = extract(test_edges, r0, c0);
            let (rank, intensity) = if c_tile.is_zero() && d_tile.is_zero() {
                (tile, T::zero())
            } else {
                let pc = characteristic_polynomial(&c_tile)
                    .expect("tile is square and within size limits")
                    .normalized();
                let pd = characteristic_polynomial(&d_tile)
                    .expect("tile is square and within size limits")
                    .normalized();
                let s = build_sylvester(&pc, &pd).expect("degrees match by construction");
                let rank = numerical_rank(&s, tol).expect("tolerance validated above");
                (rank, intensity_for_rank(rank, tile))
            };
            TileScore { tile_row: r0 / stride, tile_col: c0 / stride, rank, intensity }
        })
        .collect();

    let mut intensity = vec![T::zero(); p * q];
    for (score, &(r0, c0)) in tiles.iter().zip(&positions) {
        for r in r0..r0 + tile {
            for c in c0..c0 + tile {
                let cell = &mut intensity[r * q + c];
                *cell = cell.max(score.intensity);
            }
        }
    }
    Ok(DefectMap { tile_size: tile, stride, rows: p, cols: q, tiles, intensity })
}

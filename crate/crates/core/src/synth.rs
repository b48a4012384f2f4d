//! Seeded synthetic fabric pairs: a periodic weave texture, a painted defect,
//! an optional affine skew and illumination ramp, plus the ground-truth mask
//! in reference coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::mask::BinaryMask;
use crate::register::AffineTransform;
use crate::scalar::real;

/// Defect painted on the test image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectKind {
    None,
    LineBreak,
    Spot,
    Tear,
    /// A spot defect under a stronger illumination gradient.
    IlluminationSpot,
}

impl DefectKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "none" => Ok(Self::None),
            "line-break" => Ok(Self::LineBreak),
            "spot" => Ok(Self::Spot),
            "tear" => Ok(Self::Tear),
            "illumination-gradient+spot" | "illumination-spot" => Ok(Self::IlluminationSpot),
            other => Err(Error::arg(format!("unknown defect kind '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::LineBreak => "line-break",
            Self::Spot => "spot",
            Self::Tear => "tear",
            Self::IlluminationSpot => "illumination-gradient+spot",
        }
    }

    pub fn is_defective(&self) -> bool {
        !matches!(self, Self::None)
    }
}

/// Geometry and nuisance controls for one synthetic pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub kind: DefectKind,
    pub rows: usize,
    pub cols: usize,
    /// Apply a small random affine skew to the test image.
    pub skew: bool,
    /// Apply a global illumination ramp to the test image.
    pub illumination: bool,
    /// Defect center (x, y); random placement away from borders when `None`.
    pub center: Option<(f64, f64)>,
    /// Defect size (spot radius, line length scale); randomized when `None`.
    pub size: Option<f64>,
}

impl SyntheticSpec {
    pub fn new(kind: DefectKind, rows: usize, cols: usize) -> Self {
        Self { kind, rows, cols, skew: true, illumination: true, center: None, size: None }
    }
}

/// One generated pair with its ground truth (reference coordinates).
#[derive(Debug, Clone)]
pub struct SyntheticPair {
    pub reference: GrayImage<f64>,
    pub test: GrayImage<f64>,
    pub truth: BinaryMask,
}

const TEXTURE_LO: f64 = 0.05;
const TEXTURE_HI: f64 = 0.95;

fn clamp_sample(img: &[f64], rows: usize, cols: usize, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (cols - 1) as f64);
    let y = y.clamp(0.0, (rows - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(cols - 1);
    let y1 = (y0 + 1).min(rows - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let top = img[y0 * cols + x0] * (1.0 - fx) + img[y0 * cols + x1] * fx;
    let bot = img[y1 * cols + x0] * (1.0 - fx) + img[y1 * cols + x1] * fx;
    top * (1.0 - fy) + bot * fy
}

/// Deterministically generates `(reference, test, truth)` for a seed and spec.
pub fn generate_synthetic_pair(texture_seed: u64, spec: &SyntheticSpec) -> Result<SyntheticPair> {
    let (p, q) = (spec.rows, spec.cols);
    if p < 32 || q < 32 {
        return Err(Error::arg("synthetic images must be at least 32x32"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(texture_seed);

    // Two orthogonal sinusoid gratings plus per-pixel noise.
    let period_x = rng.random_range(14.0..22.0);
    let period_y = rng.random_range(14.0..22.0);
    let phase_x = rng.random_range(0.0..std::f64::consts::TAU);
    let phase_y = rng.random_range(0.0..std::f64::consts::TAU);
    let amp_x = rng.random_range(0.10..0.14);
    let amp_y = rng.random_range(0.10..0.14);
    let noise_amp = 0.02;
    let mut reference = vec![0.0f64; p * q];
    for r in 0..p {
        for c in 0..q {
            let v = 0.5
                + amp_x * (std::f64::consts::TAU * c as f64 / period_x + phase_x).sin()
                + amp_y * (std::f64::consts::TAU * r as f64 / period_y + phase_y).sin()
                + noise_amp * (2.0 * rng.random_range(0.0..1.0) - 1.0);
            reference[r * q + c] = v.clamp(TEXTURE_LO, TEXTURE_HI);
        }
    }

    // Paint the defect on a copy, tracking the painted footprint.
    let mut defected = reference.clone();
    let mut footprint = BinaryMask::new(p, q);
    // Keep random defects away from borders, where warping and the validity
    // mask interact; scale the margin down for small images.
    let margin_x = (q as f64 / 4.0).min(96.0);
    let margin_y = (p as f64 / 4.0).min(96.0);
    let center = spec.center.unwrap_or_else(|| {
        (
            rng.random_range(margin_x..q as f64 - margin_x),
            rng.random_range(margin_y..p as f64 - margin_y),
        )
    });
    let delta = -rng.random_range(0.32..0.40);
    let mut paint = |r: usize, c: usize| {
        let i = r * q + c;
        defected[i] = (defected[i] + delta).clamp(0.0, 1.0);
        footprint.set(r, c, true);
    };
    match spec.kind {
        DefectKind::None => {}
        DefectKind::Spot | DefectKind::IlluminationSpot => {
            let radius = spec.size.unwrap_or_else(|| rng.random_range(6.0..14.0));
            let r2 = radius * radius;
            let (cx, cy) = center;
            for r in 0..p {
                for c in 0..q {
                    let (dx, dy) = (c as f64 - cx, r as f64 - cy);
                    if dx * dx + dy * dy <= r2 {
                        paint(r, c);
                    }
                }
            }
        }
        DefectKind::LineBreak => {
            let length = spec.size.unwrap_or_else(|| rng.random_range(40.0..120.0));
            let horizontal = rng.random_range(0..2) == 0;
            let half = (length / 2.0) as i64;
            let (cx, cy) = (center.0 as i64, center.1 as i64);
            for t in -half..=half {
                for thick in 0..2i64 {
                    let (r, c) = if horizontal { (cy + thick, cx + t) } else { (cy + t, cx + thick) };
                    if r >= 0 && (r as usize) < p && c >= 0 && (c as usize) < q {
                        paint(r as usize, c as usize);
                    }
                }
            }
        }
        DefectKind::Tear => {
            let length = spec.size.unwrap_or_else(|| rng.random_range(60.0..140.0));
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            let thickness = rng.random_range(5.0..9.0);
            let (dx, dy) = (angle.cos(), angle.sin());
            let (cx, cy) = center;
            let (half, half_t) = (length / 2.0, thickness / 2.0);
            let reach = (half + half_t).ceil() as i64;
            for dr in -reach..=reach {
                for dc in -reach..=reach {
                    let (r, c) = (cy as i64 + dr, cx as i64 + dc);
                    if r < 0 || r as usize >= p || c < 0 || c as usize >= q {
                        continue;
                    }
                    let (vx, vy) = (c as f64 - cx, r as f64 - cy);
                    let along = vx * dx + vy * dy;
                    let across = (-vx * dy + vy * dx).abs();
                    if along.abs() <= half && across <= half_t {
                        paint(r as usize, c as usize);
                    }
                }
            }
        }
    }
    // Edge-based detection marks defect boundaries, so the ground truth is
    // the footprint dilated by one pixel.
    let truth = footprint.dilate8();

    // Compose the skew: test(x) samples the defected reference at W(x) with
    // clamp-to-edge so no synthetic zero wedges enter the test image.
    let skew = if spec.skew {
        // Camera jitter scale: fractions of a degree and a few pixels, the
        // regime the paper's capture setup implies. Larger misalignments are
        // exercised separately on point correspondences.
        let angle: f64 = rng.random_range(-0.008..0.008);
        let scale: f64 = rng.random_range(0.996..1.004);
        let (sin, cos) = (angle.sin() * scale, angle.cos() * scale);
        AffineTransform {
            a11: cos,
            a12: -sin,
            a21: sin,
            a22: cos,
            tx: rng.random_range(-3.0..3.0),
            ty: rng.random_range(-3.0..3.0),
        }
    } else {
        AffineTransform::identity()
    };
    let ramp_strength = match (spec.illumination, spec.kind) {
        (false, _) => 0.0,
        (true, DefectKind::IlluminationSpot) => rng.random_range(0.08..0.11),
        (true, _) => rng.random_range(0.04..0.07),
    };
    let ramp_dir = rng.random_range(0.0..std::f64::consts::TAU);
    let (ux, uy) = (ramp_dir.cos(), ramp_dir.sin());

    let mut test = vec![0.0f64; p * q];
    for r in 0..p {
        for c in 0..q {
            let (sx, sy) = skew.apply(c as f64, r as f64);
            let mut v = clamp_sample(&defected, p, q, sx, sy);
            if ramp_strength > 0.0 {
                let gx = (c as f64 / (q - 1) as f64) - 0.5;
                let gy = (r as f64 / (p - 1) as f64) - 0.5;
                v *= 1.0 + ramp_strength * (ux * gx + uy * gy) * 2.0;
            }
            test[r * q + c] = v.clamp(0.0, 1.0);
        }
    }

    Ok(SyntheticPair {
        reference: GrayImage::from_vec(p, q, reference.iter().map(|&v| real(v)).collect())?,
        test: GrayImage::from_vec(p, q, test)?,
        truth,
    })
}

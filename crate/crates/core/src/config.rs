//! Pipeline configuration: defaults, validation, and the flat `key = value`
//! config-file format (one pair per line, `#` comments).

use crate::error::{Error, Result};

/// Every tunable parameter of the inspection pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Quantization level count L.
    pub levels: usize,
    pub resize_width: usize,
    pub resize_height: usize,
    /// Double-threshold bounds on the absolute difference.
    pub ht_min: f64,
    pub ht_max: f64,
    /// Zero-phase Butterworth order d.
    pub filter_order: usize,
    /// Cutoff frequency in radians.
    pub filter_cutoff: f64,
    /// Filter design length N.
    pub filter_length: usize,
    /// Sylvester tile size w and stride s.
    pub tile_size: usize,
    pub tile_stride: usize,
    /// Relative singular-value tolerance for numerical rank.
    pub rank_tolerance: f64,
    /// Per-pixel intensity threshold for the defect mask.
    pub intensity_threshold: f64,
    /// Minimum mask pixels for a defect-present decision.
    pub min_defect_pixels: usize,
    pub ransac_seed: u64,
    pub ransac_iterations: usize,
    pub ransac_inlier_radius: f64,
    /// Batch worker count; 0 selects the available parallelism.
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            levels: 256,
            resize_width: 1024,
            resize_height: 1024,
            ht_min: 0.035,
            ht_max: 0.150,
            filter_order: 3,
            filter_cutoff: 0.9,
            filter_length: 1024,
            tile_size: 8,
            tile_stride: 8,
            rank_tolerance: 1e-8,
            intensity_threshold: 0.25,
            min_defect_pixels: 1,
            ransac_seed: 42,
            ransac_iterations: 1000,
            ransac_inlier_radius: 2.0,
            workers: 0,
        }
    }
}

impl PipelineConfig {
    /// Parses the flat `key = value` format; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                Error::Config(format!("line {}: invalid {what} value '{value}'", lineno + 1))
            };
            match key {
                "levels" => cfg.levels = value.parse().map_err(|_| bad(key))?,
                "resize_width" => cfg.resize_width = value.parse().map_err(|_| bad(key))?,
                "resize_height" => cfg.resize_height = value.parse().map_err(|_| bad(key))?,
                "ht_min" => cfg.ht_min = value.parse().map_err(|_| bad(key))?,
                "ht_max" => cfg.ht_max = value.parse().map_err(|_| bad(key))?,
                "filter_order" => cfg.filter_order = value.parse().map_err(|_| bad(key))?,
                "filter_cutoff" => cfg.filter_cutoff = value.parse().map_err(|_| bad(key))?,
                "filter_length" => cfg.filter_length = value.parse().map_err(|_| bad(key))?,
                "tile_size" => cfg.tile_size = value.parse().map_err(|_| bad(key))?,
                "tile_stride" => cfg.tile_stride = value.parse().map_err(|_| bad(key))?,
                "rank_tolerance" => cfg.rank_tolerance = value.parse().map_err(|_| bad(key))?,
                "intensity_threshold" => {
                    cfg.intensity_threshold = value.parse().map_err(|_| bad(key))?
                }
                "min_defect_pixels" => {
                    cfg.min_defect_pixels = value.parse().map_err(|_| bad(key))?
                }
                "ransac_seed" => cfg.ransac_seed = value.parse().map_err(|_| bad(key))?,
                "ransac_iterations" => {
                    cfg.ransac_iterations = value.parse().map_err(|_| bad(key))?
                }
                "ransac_inlier_radius" => {
                    cfg.ransac_inlier_radius = value.parse().map_err(|_| bad(key))?
                }
                "workers" => cfg.workers = value.parse().map_err(|_| bad(key))?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    /// Serializes in the same format [`PipelineConfig::parse`] reads.
    pub fn to_config_string(&self) -> String {
        format!(
            "levels = {}\n\
             resize_width = {}\n\
             resize_height = {}\n\
             ht_min = {}\n\
             ht_max = {}\n\
             filter_order = {}\n\
             filter_cutoff = {}\n\
             filter_length = {}\n\
             tile_size = {}\n\
             tile_stride = {}\n\
             rank_tolerance = {}\n\
             intensity_threshold = {}\n\
             min_defect_pixels = {}\n\
             ransac_seed = {}\n\
             ransac_iterations = {}\n\
             ransac_inlier_radius = {}\n\
             workers = {}\n",
            self.levels,
            self.resize_width,
            self.resize_height,
            self.ht_min,
            self.ht_max,
            self.filter_order,
            self.filter_cutoff,
            self.filter_length,
            self.tile_size,
            self.tile_stride,
            self.rank_tolerance,
            self.intensity_threshold,
            self.min_defect_pixels,
            self.ransac_seed,
            self.ransac_iterations,
            self.ransac_inlier_radius,
            self.workers,
        )
    }

    /// Checks every parameter against its stage's preconditions.
    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::arg("levels must be at least 2"));
        }
        if self.resize_width < 16 || self.resize_height < 16 {
            return Err(Error::arg("resize target must be at least 16x16"));
        }
        if !(self.ht_min >= 0.0 && self.ht_min < self.ht_max && self.ht_max <= 1.0) {
            return Err(Error::arg("thresholds must satisfy 0 <= ht_min < ht_max <= 1"));
        }
        if self.filter_order < 1 {
            return Err(Error::arg("filter_order must be at least 1"));
        }
        if !(self.filter_cutoff > 0.0 && self.filter_cutoff < std::f64::consts::PI) {
            return Err(Error::arg("filter_cutoff must lie in (0, pi)"));
        }
        if self.filter_length <= 2 * self.filter_order {
            return Err(Error::arg("filter_length must exceed twice filter_order"));
        }
        if self.resize_width > self.filter_length || self.resize_height > self.filter_length {
            return Err(Error::arg("resize target exceeds filter_length"));
        }
        if ![4, 8, 12].contains(&self.tile_size) {
            return Err(Error::arg("tile_size must be 4, 8 or 12"));
        }
        if self.tile_stride == 0 || self.tile_stride > self.tile_size {
            return Err(Error::arg("tile_stride must lie in 1..=tile_size"));
        }
        if !(self.rank_tolerance > 0.0 && self.rank_tolerance < 1.0) {
            return Err(Error::arg("rank_tolerance must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.intensity_threshold) {
            return Err(Error::arg("intensity_threshold must lie in [0, 1]"));
        }
        if self.min_defect_pixels == 0 {
            return Err(Error::arg("min_defect_pixels must be at least 1"));
        }
        if self.ransac_iterations == 0 {
            return Err(Error::arg("ransac_iterations must be at least 1"));
        }
        if self.ransac_inlier_radius <= 0.0 {
            return Err(Error::arg("ransac_inlier_radius must be positive"));
        }
        Ok(())
    }

    /// Worker count with 0 resolved to the available parallelism.
    pub fn effective_workers(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn every_parameter_round_trips() {
        let cfg = PipelineConfig {
            levels: 128,
            resize_width: 512,
            resize_height: 256,
            ht_min: 0.01,
            ht_max: 0.2,
            filter_order: 2,
            filter_cutoff: 1.1,
            filter_length: 512,
            tile_size: 4,
            tile_stride: 2,
            rank_tolerance: 1e-6,
            intensity_threshold: 0.5,
            min_defect_pixels: 9,
            ransac_seed: 7,
            ransac_iterations: 250,
            ransac_inlier_radius: 3.5,
            workers: 2,
        };
        let parsed = PipelineConfig::parse(&cfg.to_config_string()).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let cfg = PipelineConfig::parse("# heading\n\nht_min = 0.05 # inline\n").unwrap();
        assert_eq!(cfg.ht_min, 0.05);
        assert_eq!(cfg.ht_max, PipelineConfig::default().ht_max);
    }

    #[test]
    fn unknown_keys_are_errors_with_line_numbers() {
        match PipelineConfig::parse("levels = 256\nbogus = 1\n") {
            Err(Error::Config(msg)) => assert!(msg.contains("line 2"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn inverted_thresholds_fail_validation() {
        let cfg = PipelineConfig { ht_min: 0.5, ht_max: 0.1, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn oversized_resize_target_fails_validation() {
        let cfg = PipelineConfig { resize_width: 4096, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}

//! Tunable parameters for field synthesis and joint association.

use crate::Error;

/// Which pixels of the loss mask are zeroed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskPolicy {
    #[default]
    AllOnes,
    /// Zero a disk of radius 2σ around every occluded keypoint.
    ExcludeOccludedDisks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Distance in meters at which the heatmap spread equals one grid pixel.
    pub alpha_sigma: f64,
    /// Half-width of the part affinity field support, in grid pixels.
    pub paf_half_width: f64,
    /// Half-width of the temporal affinity field support, in grid pixels.
    pub taf_half_width: f64,
    pub mask_policy: MaskPolicy,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            alpha_sigma: 20.0,
            paf_half_width: 1.0,
            taf_half_width: 1.0,
            mask_policy: MaskPolicy::AllOnes,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.alpha_sigma > 0.0 && self.alpha_sigma.is_finite()) {
            return Err(Error::Config(format!(
                "alpha_sigma {} must be > 0",
                self.alpha_sigma
            )));
        }
        if !(self.paf_half_width > 0.0 && self.taf_half_width > 0.0) {
            return Err(Error::Config("affinity half-widths must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssocConfig {
    /// Weight of the previous-frame limb term in the limb score.
    pub temporal_weight: f64,
    /// Number of midpoint samples used by the line integrals.
    pub integral_samples: usize,
    pub nms_threshold: f64,
    /// Side of the square non-maximum suppression window (odd).
    pub nms_window: usize,
    pub min_limb_score: f64,
    /// Search radius as a multiple of the previous skeleton's box diagonal.
    pub search_radius_multiplier: f64,
    pub use_occluded_candidates: bool,
}

impl Default for AssocConfig {
    fn default() -> Self {
        AssocConfig {
            temporal_weight: 1.0,
            integral_samples: 10,
            nms_threshold: 0.1,
            nms_window: 3,
            min_limb_score: 0.05,
            search_radius_multiplier: 2.0,
            use_occluded_candidates: true,
        }
    }
}

impl AssocConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.temporal_weight >= 0.0) {
            return Err(Error::Config("temporal_weight must be >= 0".into()));
        }
        if self.integral_samples < 2 {
            return Err(Error::Config("integral_samples must be >= 2".into()));
        }
        if !(self.nms_threshold > 0.0 && self.nms_threshold < 1.0) {
            return Err(Error::Config("nms_threshold must lie in (0, 1)".into()));
        }
        if self.nms_window.is_multiple_of(2) {
            return Err(Error::Config("nms_window must be odd".into()));
        }
        if !(self.search_radius_multiplier > 0.0) {
            return Err(Error::Config("search_radius_multiplier must be > 0".into()));
        }
        Ok(())
    }
}

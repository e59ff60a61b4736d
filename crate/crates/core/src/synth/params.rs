use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape parameters for [`generate_skeleton`](super::generate_skeleton).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Branching generations below the trunk.
    pub depth: u32,
    pub trunk_length: f64,
    pub trunk_radius: f64,
    /// Child length as a fraction of the parent's.
    pub length_decay: f64,
    /// Child base radius as a fraction of the parent radius at the attachment.
    pub radius_decay: f64,
    /// Angle between parent and child directions, radians, inclusive range.
    pub branch_angle_range: (f64, f64),
    /// Children per branch, inclusive range.
    pub children_range: (u32, u32),
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            depth: 3,
            trunk_length: 2.0,
            trunk_radius: 0.06,
            length_decay: 0.6,
            radius_decay: 0.6,
            branch_angle_range: (0.5, 1.0),
            children_range: (2, 3),
            seed: 0,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.length_decay) || !unit(self.radius_decay) {
            return Err(Error::invalid("length and radius decay must lie in (0, 1)"));
        }
        if !(self.trunk_radius > 0.0 && self.trunk_radius.is_finite()) {
            return Err(Error::invalid("trunk radius must be positive"));
        }
        if !(self.trunk_length > 0.0 && self.trunk_length.is_finite()) {
            return Err(Error::invalid("trunk length must be positive"));
        }
        let (a0, a1) = self.branch_angle_range;
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(a0 > 0.0 && a0 <= a1 && a1 < half_pi) {
            return Err(Error::invalid("branch angle range must lie within (0, pi/2)"));
        }
        if self.children_range.0 > self.children_range.1 {
            return Err(Error::invalid("children range is empty"));
        }
        Ok(())
    }
}

/// Capture-style degradation applied by [`augment`](super::augment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    /// Standard deviation of isotropic Gaussian jitter, metres.
    pub noise_sigma: f64,
    /// Probability that a point is dropped.
    pub dropout_prob: f64,
    /// Number of spherical holes.
    pub occlusion_count: u32,
    pub occlusion_radius: f64,
    pub seed: u64,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self {
            noise_sigma: 0.0,
            dropout_prob: 0.0,
            occlusion_count: 0,
            occlusion_radius: 0.1,
            seed: 0,
        }
    }
}

impl AugmentParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("noise sigma must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.dropout_prob) {
            return Err(Error::invalid("dropout probability must lie in [0, 1]"));
        }
        if !(self.occlusion_radius >= 0.0 && self.occlusion_radius.is_finite()) {
            return Err(Error::invalid("occlusion radius must be non-negative"));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.noise_sigma == 0.0 && self.dropout_prob == 0.0 && self.occlusion_count == 0
    }
}

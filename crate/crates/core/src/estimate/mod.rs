//! Medial-field estimators and their quality metrics.
//!
//! A [`MedialField`] assigns each cloud point a log-radius and a unit
//! direction towards the branch axis. Any source of such a field (the label
//! oracle, the geometric baseline, or predictions from an external model
//! loaded alongside the cloud) can drive skeletonization.

mod baseline;
mod loss;

pub use baseline::{baseline_estimate, RADIUS_FLOOR};
pub use loss::{direction_loss, radius_loss, total_loss, EstimatorReport};

use crate::error::{Error, Result};
use crate::model::{PointCloud, Vec3};

/// Per-point natural-log radius (metres) and unit direction to the axis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MedialField {
    pub log_radius: Vec<f64>,
    pub direction: Vec<Vec3>,
}

impl MedialField {
    pub fn len(&self) -> usize {
        self.log_radius.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_radius.is_empty()
    }

    /// Checks the field against a cloud of `points` points.
    pub fn validate(&self, points: usize) -> Result<()> {
        if self.log_radius.len() != points || self.direction.len() != points {
            return Err(Error::invalid(format!(
                "medial field has {} radii and {} directions for {} points",
                self.log_radius.len(),
                self.direction.len(),
                points
            )));
        }
        if let Some(i) = self.log_radius.iter().position(|r| !r.is_finite()) {
            return Err(Error::invalid(format!("log radius {i} is not finite")));
        }
        if let Some(i) = self.direction.iter().position(|d| !((d.norm() - 1.0).abs() <= 1e-6)) {
            return Err(Error::invalid(format!("direction {i} is not unit length")));
        }
        Ok(())
    }

    /// Averages the field over groups of point indices: log radii by their
    /// mean, directions by their normalised sum (falling back to +z).
    pub fn aggregate(&self, groups: &[Vec<usize>]) -> MedialField {
        let mut out = MedialField::default();
        for g in groups {
            if let [single] = g.as_slice() {
                out.log_radius.push(self.log_radius[*single]);
                out.direction.push(self.direction[*single]);
                continue;
            }
            let lr = g.iter().map(|&i| self.log_radius[i]).sum::<f64>() / g.len() as f64;
            let mut d = Vec3::ZERO;
            for &i in g {
                d += self.direction[i];
            }
            out.log_radius.push(lr);
            out.direction.push(d.try_normalize().unwrap_or(Vec3::Z));
        }
        out
    }
}

/// Reads the field straight off the ground-truth labels.
pub fn oracle_estimate(cloud: &PointCloud) -> Result<MedialField> {
    let labels = cloud.require_labels("the oracle estimator")?;
    Ok(MedialField {
        log_radius: labels.iter().map(|l| l.radius.ln()).collect(),
        direction: labels.iter().map(|l| l.direction).collect(),
    })
}

/// Where a skeletonization run gets its medial field from.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    /// Ground-truth labels.
    Oracle,
    /// The label-free geometric estimator.
    Baseline { k: usize, iterations: usize },
    /// A field computed elsewhere, aligned with the input cloud *before*
    /// voxel downsampling.
    Provided(MedialField),
}

impl Estimator {
    /// Runs the estimator on `cloud`. `Provided` fields are returned as-is
    /// after a length check.
    pub fn estimate(&self, cloud: &PointCloud) -> Result<MedialField> {
        match self {
            Estimator::Oracle => oracle_estimate(cloud),
            Estimator::Baseline { k, iterations } => baseline_estimate(cloud, *k, *iterations),
            Estimator::Provided(field) => {
                field.validate(cloud.len())?;
                Ok(field.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GroundTruthLabel;

    fn cloud_with_radius(r: f64) -> PointCloud {
        PointCloud::labelled(
            vec![Vec3::ZERO],
            vec![GroundTruthLabel {
                radius: r,
                direction: Vec3::X,
                branch_id: 0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn oracle_log_radius() {
        let f = oracle_estimate(&cloud_with_radius(std::f64::consts::E)).unwrap();
        assert!((f.log_radius[0] - 1.0).abs() < 1e-15);
        let f = oracle_estimate(&cloud_with_radius(1.0)).unwrap();
        assert_eq!(f.log_radius[0], 0.0);
        assert_eq!(f.direction[0], Vec3::X);
    }

    #[test]
    fn oracle_needs_labels() {
        assert!(oracle_estimate(&PointCloud::new(vec![Vec3::ZERO])).is_err());
    }

    #[test]
    fn provided_length_checked() {
        let e = Estimator::Provided(MedialField::default());
        assert!(e.estimate(&PointCloud::new(vec![Vec3::ZERO])).is_err());
    }

    #[test]
    fn aggregate_groups() {
        let f = MedialField {
            log_radius: vec![0.0, 2.0, 5.0],
            direction: vec![Vec3::X, Vec3::Y, Vec3::Z],
        };
        let g = f.aggregate(&[vec![0, 1], vec![2]]);
        assert_eq!(g.log_radius, vec![1.0, 5.0]);
        assert!((g.direction[0].x - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(g.direction[1], Vec3::Z);
    }
}

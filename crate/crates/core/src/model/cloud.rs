use crate::error::{Error, Result};

use super::vec3::{Point3, Vec3};

/// Per-point ground truth: the radius of the branch the point was sampled
/// from, the unit direction from the point to its foot on the branch axis,
/// and the id of that branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthLabel {
    pub radius: f64,
    pub direction: Vec3,
    pub branch_id: u32,
}

impl GroundTruthLabel {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::invalid(format!(
                "label radius must be positive, got {}",
                self.radius
            )));
        }
        let n = self.direction.norm();
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "label direction must be unit length, got norm {n}"
            )));
        }
        Ok(())
    }
}

/// Point positions with optional per-point labels and colours.
///
/// Optional channels always hold exactly one entry per point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point3>,
    labels: Option<Vec<GroundTruthLabel>>,
    colors: Option<Vec<[u8; 3]>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        Self {
            points,
            labels: None,
            colors: None,
        }
    }

    pub fn labelled(points: Vec<Point3>, labels: Vec<GroundTruthLabel>) -> Result<Self> {
        Self::new(points).with_labels(labels)
    }

    pub fn with_labels(mut self, labels: Vec<GroundTruthLabel>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} points",
                labels.len(),
                self.points.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_colors(mut self, colors: Vec<[u8; 3]>) -> Result<Self> {
        if colors.len() != self.points.len() {
            return Err(Error::invalid(format!(
                "{} colours for {} points",
                colors.len(),
                self.points.len()
            )));
        }
        self.colors = Some(colors);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[GroundTruthLabel]> {
        self.labels.as_deref()
    }

    pub fn colors(&self) -> Option<&[[u8; 3]]> {
        self.colors.as_deref()
    }

    /// Labels, or an invalid-input error naming `what` needed them.
    pub fn require_labels(&self, what: &str) -> Result<&[GroundTruthLabel]> {
        self.labels()
            .ok_or_else(|| Error::invalid(format!("{what} requires a labelled cloud")))
    }

    /// Fails on the first non-finite coordinate.
    pub fn check_finite(&self) -> Result<()> {
        match self.points.iter().position(|p| !p.is_finite()) {
            Some(i) => Err(Error::invalid(format!("point {i} has a non-finite coordinate"))),
            None => Ok(()),
        }
    }

    /// Keeps the points for which `keep(index)` is true, preserving order and
    /// every optional channel.
    pub fn filter_indices(&self, mut keep: impl FnMut(usize) -> bool) -> PointCloud {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        self.select(&idx)
    }

    /// The sub-cloud at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
            colors: self.colors.as_ref().map(|c| indices.iter().map(|&i| c[i]).collect()),
        }
    }

    /// Replaces positions, keeping the other channels. Lengths must match.
    pub fn with_points(mut self, points: Vec<Point3>) -> Result<Self> {
        if points.len() != self.points.len() {
            return Err(Error::invalid("replacement positions differ in length"));
        }
        self.points = points;
        Ok(self)
    }
}

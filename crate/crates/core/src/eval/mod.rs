//! Radius-relative precision, recall and F1 between two skeletons.

mod plot;

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Point3, Skeleton};
use crate::spatial::KdTree;

pub use plot::render_svg;

/// Dense point samples along a skeleton.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SkeletonSamples {
    pub positions: Vec<Point3>,
    pub radii: Vec<f64>,
}

impl SkeletonSamples {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Samples every node once, then subdivides each parent→child link into
/// `ceil(length / spacing)` equal steps, interpolating position and radius.
pub fn resample_skeleton(skeleton: &Skeleton, spacing: f64) -> Result<SkeletonSamples> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid(format!(
            "sample spacing must be positive, got {spacing}"
        )));
    }
    let mut out = SkeletonSamples::default();
    for n in &skeleton.nodes {
        out.positions.push(n.position);
        out.radii.push(n.radius);
    }
    for e in skeleton.edges() {
        // The epsilon keeps exact multiples of `spacing` from gaining a step.
        let steps = ((e.length() / spacing - 1e-9).ceil() as usize).max(1);
        for k in 1..steps {
            let t = k as f64 / steps as f64;
            out.positions.push(e.from.lerp(e.to, t));
            out.radii.push(e.from_radius + (e.to_radius - e.from_radius) * t);
        }
    }
    Ok(out)
}

/// One sample's best counterpart in the other set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    /// Index into the other sample set.
    pub index: usize,
    pub distance: f64,
    /// The ground-truth radius the distance is measured against.
    pub radius: f64,
}

impl Match {
    /// `d < t·r`.
    pub fn within(&self, t: f64) -> bool {
        self.distance < t * self.radius
    }
}

fn require_samples(output: &SkeletonSamples, gt: &SkeletonSamples) -> Result<()> {
    if output.is_empty() || gt.is_empty() {
        return Err(Error::invalid("precision and recall need non-empty sample sets"));
    }
    Ok(())
}

/// For each output sample, the ground-truth sample with the smallest
/// `distance / radius` (ties to the smaller index).
pub fn precision_matches(output: &SkeletonSamples, gt: &SkeletonSamples) -> Result<Vec<Match>> {
    require_samples(output, gt)?;
    let tree = KdTree::with_weights(&gt.positions, &gt.radii);
    Ok(output
        .positions
        .par_iter()
        .map(|&p| {
            let (index, distance) = tree.nearest_relative(p).expect("non-empty tree");
            Match {
                index,
                distance,
                radius: gt.radii[index],
            }
        })
        .collect())
}

/// For each ground-truth sample, the Euclidean-nearest output sample (ties
/// to the smaller index), measured against the ground-truth sample's radius.
pub fn recall_matches(output: &SkeletonSamples, gt: &SkeletonSamples) -> Result<Vec<Match>> {
    require_samples(output, gt)?;
    let tree = KdTree::new(&output.positions);
    Ok(gt
        .positions
        .par_iter()
        .zip(&gt.radii)
        .map(|(&p, &radius)| {
            let (index, distance) = tree.nearest(p).expect("non-empty tree");
            Match {
                index,
                distance,
                radius,
            }
        })
        .collect())
}

fn percent_within(matches: &[Match], t: f64) -> f64 {
    let hit = matches.iter().filter(|m| m.within(t)).count();
    100.0 * hit as f64 / matches.len() as f64
}

/// Percentage of output samples within `t` ground-truth radii of the
/// ground truth.
pub fn precision(output: &SkeletonSamples, gt: &SkeletonSamples, t: f64) -> Result<f64> {
    check_threshold(t)?;
    Ok(percent_within(&precision_matches(output, gt)?, t))
}

/// Percentage of ground-truth samples within `t` of their own radius from
/// the output.
pub fn recall(output: &SkeletonSamples, gt: &SkeletonSamples, t: f64) -> Result<f64> {
    check_threshold(t)?;
    Ok(percent_within(&recall_matches(output, gt)?, t))
}

fn check_threshold(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("threshold must be non-negative, got {t}")));
    }
    Ok(())
}

/// Harmonic mean of two percentages; 0 when both are 0.
pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Curves over `t = k/(steps−1)` and their trapezoidal areas on the unit
/// scale.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub thresholds: Vec<f64>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub precision_auc: f64,
    pub recall_auc: f64,
    pub f1_auc: f64,
}

impl EvalReport {
    /// One row per threshold under the header `t,precision,recall,f1`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,precision,recall,f1\n");
        for i in 0..self.thresholds.len() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                self.thresholds[i], self.precision[i], self.recall[i], self.f1[i]
            );
        }
        s
    }
}

/// Area under a percent curve sampled at `ts`, divided by 100.
pub fn trapezoid_auc(ts: &[f64], curve: &[f64]) -> f64 {
    ts.windows(2)
        .zip(curve.windows(2))
        .map(|(t, c)| (t[1] - t[0]) * (c[0] + c[1]) / 200.0)
        .sum()
}

/// Evaluates precision, recall and F1 at `steps` evenly spaced thresholds
/// in [0, 1].
pub fn sweep_and_auc(output: &SkeletonSamples, gt: &SkeletonSamples, steps: usize) -> Result<EvalReport> {
    if steps < 2 {
        return Err(Error::invalid(format!("need at least 2 threshold steps, got {steps}")));
    }
    let pm = precision_matches(output, gt)?;
    let rm = recall_matches(output, gt)?;
    let thresholds: Vec<f64> = (0..steps).map(|k| k as f64 / (steps - 1) as f64).collect();
    let precision: Vec<f64> = thresholds.iter().map(|&t| percent_within(&pm, t)).collect();
    let recall: Vec<f64> = thresholds.iter().map(|&t| percent_within(&rm, t)).collect();
    let f1: Vec<f64> = precision.iter().zip(&recall).map(|(&p, &r)| f1(p, r)).collect();
    Ok(EvalReport {
        precision_auc: trapezoid_auc(&thresholds, &precision),
        recall_auc: trapezoid_auc(&thresholds, &recall),
        f1_auc: trapezoid_auc(&thresholds, &f1),
        thresholds,
        precision,
        recall,
        f1,
    })
}

/// Resamples both skeletons at `spacing` and sweeps.
pub fn evaluate(output: &Skeleton, gt: &Skeleton, spacing: f64, steps: usize) -> Result<EvalReport> {
    let o = resample_skeleton(output, spacing)?;
    let g = resample_skeleton(gt, spacing)?;
    sweep_and_auc(&o, &g, steps)
}

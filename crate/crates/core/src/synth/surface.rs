use std::f64::consts::TAU;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{GroundTruthLabel, PointCloud, Skeleton};

use super::{rng_for, streams};

/// Samples the tube surface around every skeleton link.
///
/// Each link is a truncated cone between its endpoint radii. The number of
/// points per link is `density × lateral area`, stochastically rounded;
/// points are uniform over that area. Every label carries the interpolated axis radius,
/// the unit direction from the point to its foot on the axis, and the link's
/// branch id, so `point + radius · direction` lies on the axis.
pub fn sample_surface(skeleton: &Skeleton, density: f64, seed: u64) -> Result<PointCloud> {
    if skeleton.is_empty() {
        return Err(Error::invalid("cannot sample an empty skeleton"));
    }
    if !(density > 0.0 && density.is_finite()) {
        return Err(Error::invalid(format!("density must be positive, got {density}")));
    }
    let mut rng = rng_for(seed, streams::SURFACE);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for edge in skeleton.edges() {
        let axis = edge.to - edge.from;
        let length = axis.norm();
        let (r0, r1) = (edge.from_radius, edge.to_radius);
        let slant = length.hypot(r1 - r0);
        let mean = density * std::f64::consts::PI * (r0 + r1) * slant;
        if length <= 0.0 || mean <= 0.0 {
            continue;
        }
        // Stochastic rounding keeps the expected count exact.
        let count = (mean + rng.random::<f64>()).floor() as usize;
        let unit = axis / length;
        let u = unit.any_orthonormal();
        let v = unit.cross(u);
        for _ in 0..count {
            let s = cone_fraction(rng.random::<f64>(), r0, r1);
            let theta = rng.random_range(0.0..TAU);
            let foot = edge.from + axis * s;
            let radius = r0 + (r1 - r0) * s;
            let outward = u * theta.cos() + v * theta.sin();
            points.push(foot + outward * radius);
            labels.push(GroundTruthLabel {
                radius,
                direction: -outward,
                branch_id: edge.branch_id,
            });
        }
    }
    PointCloud::labelled(points, labels)
}

/// Inverse CDF of the axial position on a cone whose surface density grows
/// linearly with the radius, from `r0` at 0 to `r1` at 1.
fn cone_fraction(u: f64, r0: f64, r1: f64) -> f64 {
    // Root of r0·s + (r1 − r0)·s²/2 = u·(r0 + r1)/2, in a cancellation-free form.
    let s = u * (r0 + r1) / (r0 + (r0 * r0 + u * (r1 * r1 - r0 * r0)).sqrt());
    s.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Point3, SkeletonNode, Vec3};

    fn node(id: usize, p: Point3, r: f64, parent: Option<usize>, branch: u32) -> SkeletonNode {
        SkeletonNode {
            id,
            position: p,
            radius: r,
            parent,
            branch_id: branch,
        }
    }

    pub(crate) fn cylinder(radius: f64, length: f64) -> Skeleton {
        Skeleton::new(vec![
            node(0, Vec3::ZERO, radius, None, 0),
            node(1, Vec3::new(0.0, 0.0, length), radius, Some(0), 0),
        ])
    }

    #[test]
    fn cylinder_samples_on_surface() {
        let cloud = sample_surface(&cylinder(0.1, 1.0), 1000.0, 5).unwrap();
        let labels = cloud.labels().unwrap();
        for (p, l) in cloud.points().iter().zip(labels) {
            assert!(((p.x * p.x + p.y * p.y).sqrt() - 0.1).abs() < 1e-12);
            let foot = *p + l.direction * l.radius;
            assert!(foot.x.abs() < 1e-6 && foot.y.abs() < 1e-6);
            assert!((l.direction.norm() - 1.0).abs() < 1e-6);
            assert_eq!(l.branch_id, 0);
        }
    }

    #[test]
    fn count_follows_area() {
        // 1000 × 2π·0.1·1 ≈ 628.3
        let expected = 1000.0 * TAU * 0.1;
        for seed in 0..20 {
            let n = sample_surface(&cylinder(0.1, 1.0), 1000.0, seed).unwrap().len() as f64;
            assert!((n - expected).abs() < 0.1 * expected, "seed {seed}: {n}");
        }
    }

    #[test]
    fn errors() {
        assert!(sample_surface(&Skeleton::default(), 10.0, 0).is_err());
        assert!(sample_surface(&cylinder(0.1, 1.0), 0.0, 0).is_err());
    }

    #[test]
    fn cone_fraction_matches_cdf() {
        for &(r0, r1) in &[(0.1, 0.1), (0.2, 0.05), (0.01, 0.3)] {
            for k in 0..=10 {
                let u = k as f64 / 10.0;
                let s = cone_fraction(u, r0, r1);
                let cdf = (r0 * s + (r1 - r0) * s * s / 2.0) / ((r0 + r1) / 2.0);
                assert!((cdf - u).abs() < 1e-12);
            }
        }
    }

    /// Distance from `p` to segment `a`–`b`.
    fn segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
        let ab = b - a;
        let t = ((p - a).dot(ab) / ab.norm_squared()).clamp(0.0, 1.0);
        p.distance(a + ab * t)
    }

    #[test]
    fn branch_ids_match_nearest_axis_away_from_the_fork() {
        // A Y: trunk 0→1, arms from the fork at (0,0,1).
        let fork = Vec3::new(0.0, 0.0, 1.0);
        let s = Skeleton::new(vec![
            node(0, Vec3::ZERO, 0.05, None, 0),
            node(1, fork, 0.05, Some(0), 0),
            node(2, Vec3::new(0.6, 0.0, 1.6), 0.03, Some(1), 1),
            node(3, Vec3::new(-0.6, 0.0, 1.6), 0.03, Some(1), 2),
        ]);
        let segs = [(0, 1, 0u32), (1, 2, 1), (1, 3, 2)];
        let cloud = sample_surface(&s, 20_000.0, 3).unwrap();
        let mut checked = 0;
        for (p, l) in cloud.points().iter().zip(cloud.labels().unwrap()) {
            // Near the fork every tube overlaps the others; nearest-axis
            // ownership is ambiguous there.
            if p.distance(fork) < 3.0 * 0.05 {
                continue;
            }
            let nearest = segs
                .iter()
                .map(|&(a, b, id)| (segment_distance(*p, s.nodes[a].position, s.nodes[b].position), id))
                .min_by(|x, y| x.0.total_cmp(&y.0))
                .unwrap();
            assert_eq!(l.branch_id, nearest.1);
            checked += 1;
        }
        assert!(
            checked as f64 > 0.75 * cloud.len() as f64,
            "{checked} of {}",
            cloud.len()
        );
    }
}

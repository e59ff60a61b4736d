use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::model::{Point3, PointCloud, Vec3};

use super::{params::AugmentParams, rng_for, streams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Point3,
    pub radius: f64,
}

impl Sphere {
    pub fn contains(&self, p: Point3) -> bool {
        p.distance(self.center) < self.radius
    }
}

/// Removes every point strictly inside any of `spheres`.
pub fn occlude(cloud: &PointCloud, spheres: &[Sphere]) -> PointCloud {
    let pts = cloud.points();
    cloud.filter_indices(|i| !spheres.iter().any(|s| s.contains(pts[i])))
}

/// Degrades a labelled cloud the way a noisy capture would.
///
/// Draw protocol, each from its own stream of `params.seed`:
/// - occlusion: `occlusion_count` sphere centres, each a uniformly chosen
///   input point; points inside any sphere are removed;
/// - dropout: one uniform `[0, 1)` draw per input point, in order; the point
///   survives when the draw is `>= dropout_prob`;
/// - noise: three standard-normal draws (x, y, z) per input point, in order,
///   scaled by `noise_sigma`.
///
/// Draws are made for every input point whether or not it survives, so the
/// displacement of a point depends only on its index. Labels are carried
/// over untouched and keep describing the noise-free geometry.
pub fn augment(cloud: &PointCloud, params: &AugmentParams) -> Result<PointCloud> {
    params.validate()?;
    cloud.require_labels("augmentation")?;
    let n = cloud.len();
    let pts = cloud.points();

    let mut spheres = Vec::with_capacity(params.occlusion_count as usize);
    if n > 0 {
        let mut rng = rng_for(params.seed, streams::OCCLUSION);
        for _ in 0..params.occlusion_count {
            spheres.push(Sphere {
                center: pts[rng.random_range(0..n)],
                radius: params.occlusion_radius,
            });
        }
    }

    let mut rng = rng_for(params.seed, streams::DROPOUT);
    let dropped: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < params.dropout_prob).collect();

    let moved: Vec<Point3> = if params.noise_sigma > 0.0 {
        let mut rng = rng_for(params.seed, streams::NOISE);
        pts.iter()
            .map(|&p| {
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                let z: f64 = rng.sample(StandardNormal);
                p + Vec3::new(x, y, z) * params.noise_sigma
            })
            .collect()
    } else {
        pts.to_vec()
    };

    let keep: Vec<usize> = (0..n)
        .filter(|&i| !dropped[i] && !spheres.iter().any(|s| s.contains(pts[i])))
        .collect();
    let out = cloud.select(&keep);
    let moved = keep.iter().map(|&i| moved[i]).collect();
    out.with_points(moved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GroundTruthLabel;
    use crate::synth::{rng_for, streams};

    fn labelled(n: usize) -> PointCloud {
        let pts: Vec<Vec3> = (0..n).map(|i| Vec3::new(i as f64 * 0.01, 0.0, 0.0)).collect();
        let labels = vec![
            GroundTruthLabel {
                radius: 0.1,
                direction: Vec3::Z,
                branch_id: 0,
            };
            n
        ];
        PointCloud::labelled(pts, labels).unwrap()
    }

    #[test]
    fn identity_when_disabled() {
        let c = labelled(100);
        let out = augment(&c, &AugmentParams::default()).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn full_dropout_empties() {
        let p = AugmentParams {
            dropout_prob: 1.0,
            ..Default::default()
        };
        assert!(augment(&labelled(100), &p).unwrap().is_empty());
    }

    #[test]
    fn unlabelled_rejected() {
        let c = PointCloud::new(vec![Vec3::ZERO]);
        assert!(augment(&c, &AugmentParams::default()).is_err());
    }

    #[test]
    fn noise_matches_independent_draws() {
        let sigma = 0.005;
        let c = labelled(10_000);
        let p = AugmentParams {
            noise_sigma: sigma,
            seed: 42,
            ..Default::default()
        };
        let out = augment(&c, &p).unwrap();
        assert_eq!(out.len(), c.len());

        // Oracle: replay the documented stream directly.
        let mut rng = rng_for(42, streams::NOISE);
        let mut total = 0.0;
        for (orig, got) in c.points().iter().zip(out.points()) {
            let d = Vec3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            ) * sigma;
            assert_eq!(*got, *orig + d);
            total += (*got - *orig).norm();
        }
        // Mean of a 3D isotropic Gaussian's magnitude is σ·√(8/π).
        let mean = total / c.len() as f64;
        let expected = sigma * (8.0 / std::f64::consts::PI).sqrt();
        assert!((mean - expected).abs() < 0.05 * expected, "{mean} vs {expected}");
        // Labels are not re-derived.
        assert_eq!(out.labels(), c.labels());
    }

    #[test]
    fn dropout_rate_and_determinism() {
        let c = labelled(20_000);
        let p = AugmentParams {
            dropout_prob: 0.25,
            seed: 7,
            ..Default::default()
        };
        let a = augment(&c, &p).unwrap();
        let b = augment(&c, &p).unwrap();
        assert_eq!(a, b);
        let kept = a.len() as f64 / c.len() as f64;
        assert!((kept - 0.75).abs() < 0.02, "{kept}");
    }

    #[test]
    fn occlusion_removes_sphere_contents() {
        let c = labelled(1000);
        let p = AugmentParams {
            occlusion_count: 2,
            occlusion_radius: 0.5,
            seed: 3,
            ..Default::default()
        };
        let out = augment(&c, &p).unwrap();
        assert!(out.len() < c.len());
        // Recover the centres from the documented stream and check no
        // survivor lies inside.
        let mut rng = rng_for(3, streams::OCCLUSION);
        let centres: Vec<Vec3> = (0..2).map(|_| c.points()[rng.random_range(0..1000)]).collect();
        for q in out.points() {
            assert!(centres.iter().all(|cen| q.distance(*cen) >= 0.5));
        }
    }

    #[test]
    fn explicit_occlusion() {
        let c = labelled(100);
        let out = occlude(
            &c,
            &[Sphere {
                center: Vec3::new(0.5, 0.0, 0.0),
                radius: 0.105,
            }],
        );
        assert_eq!(out.len(), 100 - 21);
    }
}

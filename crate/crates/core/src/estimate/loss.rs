use crate::error::{Error, Result};
use crate::model::GroundTruthLabel;

use super::MedialField;

/// Estimator quality against ground truth. All three values are means over
/// points, so they do not grow with cloud size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorReport {
    pub radius_loss: f64,
    pub direction_loss: f64,
    pub total_loss: f64,
}

fn check_lengths(pred: &MedialField, gt: &[GroundTruthLabel]) -> Result<()> {
    if pred.log_radius.len() != gt.len() || pred.direction.len() != gt.len() {
        return Err(Error::invalid(format!(
            "prediction covers {} points, ground truth {}",
            pred.log_radius.len(),
            gt.len()
        )));
    }
    Ok(())
}

/// Mean of `1 − cos θ` between predicted and true directions, in `[0, 2]`.
///
/// Computed as `|â − b̂|² / 2` on the normalised vectors, which is exactly
/// zero when the two directions are bitwise equal.
pub fn direction_loss(pred: &MedialField, gt: &[GroundTruthLabel]) -> Result<f64> {
    check_lengths(pred, gt)?;
    if gt.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (i, (d_hat, label)) in pred.direction.iter().zip(gt).enumerate() {
        let a = d_hat
            .try_normalize()
            .ok_or_else(|| Error::invalid(format!("predicted direction {i} has zero length")))?;
        let b = label
            .direction
            .try_normalize()
            .ok_or_else(|| Error::invalid(format!("ground-truth direction {i} has zero length")))?;
        sum += (a - b).norm_squared() / 2.0;
    }
    Ok(sum / gt.len() as f64)
}

/// Mean of `|ln(R) − R̂|` where `R̂` is the predicted log radius.
pub fn radius_loss(pred: &MedialField, gt: &[GroundTruthLabel]) -> Result<f64> {
    check_lengths(pred, gt)?;
    if gt.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (i, (lr, label)) in pred.log_radius.iter().zip(gt).enumerate() {
        if !(label.radius > 0.0) {
            return Err(Error::invalid(format!(
                "ground-truth radius {i} is not positive ({})",
                label.radius
            )));
        }
        sum += (label.radius.ln() - lr).abs();
    }
    Ok(sum / gt.len() as f64)
}

pub fn total_loss(pred: &MedialField, gt: &[GroundTruthLabel]) -> Result<EstimatorReport> {
    let radius_loss = radius_loss(pred, gt)?;
    let direction_loss = direction_loss(pred, gt)?;
    Ok(EstimatorReport {
        radius_loss,
        direction_loss,
        total_loss: radius_loss + direction_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::oracle_estimate;
    use crate::model::{PointCloud, Vec3};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels(dirs: &[Vec3], radius: f64) -> Vec<GroundTruthLabel> {
        dirs.iter()
            .map(|&d| GroundTruthLabel {
                radius,
                direction: d,
                branch_id: 0,
            })
            .collect()
    }

    fn field(dirs: &[Vec3], log_radius: f64) -> MedialField {
        MedialField {
            log_radius: vec![log_radius; dirs.len()],
            direction: dirs.to_vec(),
        }
    }

    #[test]
    fn analytic_direction_cases() {
        let gt = labels(&[Vec3::X, Vec3::Y, Vec3::Z], 1.0);
        let same = field(&[Vec3::X, Vec3::Y, Vec3::Z], 0.0);
        let anti = field(&[-Vec3::X, -Vec3::Y, -Vec3::Z], 0.0);
        let ortho = field(&[Vec3::Y, Vec3::Z, Vec3::X], 0.0);
        assert_eq!(direction_loss(&same, &gt).unwrap(), 0.0);
        assert!((direction_loss(&anti, &gt).unwrap() - 2.0).abs() < 1e-12);
        assert!((direction_loss(&ortho, &gt).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_radius_case() {
        let gt = labels(&[Vec3::X], std::f64::consts::E);
        let pred = field(&[Vec3::X], 0.0);
        assert!((radius_loss(&pred, &gt).unwrap() - 1.0).abs() < 1e-12);
        let exact = field(&[Vec3::X], std::f64::consts::E.ln());
        assert_eq!(radius_loss(&exact, &gt).unwrap(), 0.0);
    }

    #[test]
    fn total_is_sum() {
        let gt = labels(&[Vec3::X, Vec3::Y], 1.0);
        let pred = field(&[Vec3::Y, Vec3::Z], 0.0);
        let r = total_loss(&pred, &gt).unwrap();
        assert_eq!(r.radius_loss, 0.0);
        assert!((r.direction_loss - 1.0).abs() < 1e-12);
        assert_eq!(r.total_loss, r.radius_loss + r.direction_loss);
    }

    #[test]
    fn perfect_prediction() {
        let gt = labels(&[Vec3::X], 0.3);
        let pred = field(&[Vec3::X], 0.3f64.ln());
        let r = total_loss(&pred, &gt).unwrap();
        assert_eq!((r.radius_loss, r.direction_loss, r.total_loss), (0.0, 0.0, 0.0));
    }

    #[test]
    fn errors() {
        let gt = labels(&[Vec3::X], 1.0);
        assert!(direction_loss(&field(&[Vec3::ZERO], 0.0), &gt).is_err());
        assert!(radius_loss(&field(&[Vec3::X], 0.0), &labels(&[Vec3::X], 0.0)).is_err());
        assert!(total_loss(&field(&[], 0.0), &gt).is_err());
    }

    #[test]
    fn radius_loss_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gt: Vec<GroundTruthLabel> = (0..100)
            .map(|_| GroundTruthLabel {
                radius: rng.random_range(0.001..1.0),
                direction: Vec3::Z,
                branch_id: 0,
            })
            .collect();
        let pred = MedialField {
            log_radius: (0..100).map(|_| rng.random_range(-7.0..1.0)).collect(),
            direction: vec![Vec3::Z; 100],
        };
        let direct = gt
            .iter()
            .zip(&pred.log_radius)
            .map(|(g, p)| (g.radius.ln() - p).abs())
            .sum::<f64>()
            / 100.0;
        assert!((radius_loss(&pred, &gt).unwrap() - direct).abs() < 1e-12);
    }

    fn unit() -> impl Strategy<Value = Vec3> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter_map("non-zero", |(x, y, z)| Vec3::new(x, y, z).try_normalize())
    }

    proptest! {
        #[test]
        fn oracle_scores_zero(
            pts in prop::collection::vec((unit(), 1e-4f64..5.0), 1..50)
        ) {
            let cloud = PointCloud::labelled(
                pts.iter().map(|_| Vec3::ZERO).collect(),
                pts.iter().map(|&(d, r)| GroundTruthLabel { radius: r, direction: d, branch_id: 0 }).collect(),
            ).unwrap();
            let f = oracle_estimate(&cloud).unwrap();
            let r = total_loss(&f, cloud.labels().unwrap()).unwrap();
            prop_assert_eq!(r.total_loss, 0.0);
        }

        #[test]
        fn direction_loss_scale_invariant(
            pairs in prop::collection::vec((unit(), unit(), 0.01f64..100.0), 1..30)
        ) {
            let gt: Vec<_> = pairs.iter().map(|&(g, _, _)| GroundTruthLabel { radius: 1.0, direction: g, branch_id: 0 }).collect();
            let a = MedialField { log_radius: vec![0.0; pairs.len()], direction: pairs.iter().map(|p| p.1).collect() };
            let b = MedialField { log_radius: vec![0.0; pairs.len()], direction: pairs.iter().map(|p| p.1 * p.2).collect() };
            let la = direction_loss(&a, &gt).unwrap();
            let lb = direction_loss(&b, &gt).unwrap();
            prop_assert!((la - lb).abs() < 1e-12);
            prop_assert!((0.0..=2.0 + 1e-12).contains(&la));
        }

        #[test]
        fn radius_loss_unit_invariant(
            pairs in prop::collection::vec((0.001f64..1.0, 0.001f64..1.0), 1..30),
            c in 0.01f64..100.0,
        ) {
            let mk = |scale: f64| {
                let gt: Vec<_> = pairs.iter().map(|&(g, _)| GroundTruthLabel { radius: g * scale, direction: Vec3::Z, branch_id: 0 }).collect();
                let f = MedialField { log_radius: pairs.iter().map(|&(_, p)| (p * scale).ln()).collect(), direction: vec![Vec3::Z; pairs.len()] };
                radius_loss(&f, &gt).unwrap()
            };
            prop_assert!((mk(1.0) - mk(c)).abs() < 1e-9);
        }
    }
}

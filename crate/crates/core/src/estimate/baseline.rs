use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{PointCloud, Vec3};
use crate::spatial::KdTree;

use super::MedialField;

/// Smallest radius the baseline reports, metres; keeps `ln` finite on
/// degenerate neighbourhoods.
pub const RADIUS_FLOOR: f64 = 1e-4;

/// Initial ball radius as a multiple of the k-NN reach.
const INITIAL_REACH: f64 = 20.0;

/// Label-free medial field from local geometry.
///
/// For each point `p`, the centroid of its `k` nearest neighbours lies on the
/// concave (axis) side of the surface; the smallest principal axis of the
/// neighbourhood, oriented towards that centroid, gives the inward normal
/// `n`. A ball tangent to the surface at `p` with centre `p + ρ·n` is then
/// shrunk for `iterations` rounds: each round gathers the `k` nearest points
/// to the current centre and reduces `ρ` to the largest value that keeps
/// every one of them outside the ball. The final centre is the shifted
/// position; the direction is `n` and the radius is `ρ`.
///
/// Neighbours are ordered by distance then index, and per-point work is
/// independent, so the result does not depend on thread count or (for
/// tie-free clouds) on point order.
pub fn baseline_estimate(cloud: &PointCloud, k: usize, iterations: usize) -> Result<MedialField> {
    if k < 3 {
        return Err(Error::invalid(format!("baseline needs k >= 3, got {k}")));
    }
    if iterations < 1 {
        return Err(Error::invalid("baseline needs at least one iteration"));
    }
    if cloud.len() < k + 1 {
        return Err(Error::invalid(format!(
            "baseline with k = {k} needs at least {} points, got {}",
            k + 1,
            cloud.len()
        )));
    }
    cloud.check_finite()?;
    let pts = cloud.points();
    let tree = KdTree::new(pts);

    let per_point: Vec<(f64, Vec3)> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let shift = medial_shift(&tree, pts, i, k, iterations);
            match shift.try_normalize().filter(|_| shift.norm() >= 1e-9) {
                Some(dir) => (shift.norm().max(RADIUS_FLOOR).ln(), dir),
                None => (RADIUS_FLOOR.ln(), Vec3::Z),
            }
        })
        .collect();

    Ok(MedialField {
        log_radius: per_point.iter().map(|p| p.0).collect(),
        direction: per_point.iter().map(|p| p.1).collect(),
    })
}

/// Displacement from point `i` to its estimated medial position.
fn medial_shift(tree: &KdTree, pts: &[Vec3], i: usize, k: usize, iterations: usize) -> Vec3 {
    let p = pts[i];
    let nn = tree.knn(p, k + 1);
    let reach = nn.last().map_or(0.0, |x| x.1);
    if reach < 1e-12 {
        return Vec3::ZERO;
    }
    let mut centroid = Vec3::ZERO;
    for &(j, _) in &nn {
        centroid += pts[j];
    }
    centroid = centroid / nn.len() as f64;

    let mut cov = Matrix3::<f64>::zeros();
    for &(j, _) in &nn {
        let d = pts[j] - centroid;
        let v = nalgebra::Vector3::new(d.x, d.y, d.z);
        cov += v * v.transpose();
    }
    let eig = cov.symmetric_eigen();
    let smallest = (0..3)
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .expect("three eigenvalues");
    let e = eig.eigenvectors.column(smallest);
    let mut normal = match Vec3::new(e[0], e[1], e[2]).try_normalize() {
        Some(n) => n,
        None => return Vec3::ZERO,
    };
    if (centroid - p).dot(normal) < 0.0 {
        normal = -normal;
    }

    let mut rho = INITIAL_REACH * reach;
    for _ in 0..iterations {
        let centre = p + normal * rho;
        let mut shrunk = rho;
        for (j, _) in tree.knn(centre, k) {
            let v = pts[j] - p;
            let h = v.dot(normal);
            if h > 1e-12 * reach {
                // Radius of the ball through p and pts[j] centred on p + ρ·n.
                shrunk = shrunk.min(v.norm_squared() / (2.0 * h));
            }
        }
        if shrunk >= rho {
            break;
        }
        rho = shrunk;
    }
    normal * rho
}

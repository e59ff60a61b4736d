use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::cloud::{GroundTruthLabel, PointCloud};
use super::vec3::{Point3, Vec3};

/// Integer voxel coordinates. Ordering is z-major, then y, then x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VoxelKey {
    pub z: i64,
    pub y: i64,
    pub x: i64,
}

impl VoxelKey {
    pub fn of(p: Point3, resolution: f64) -> Self {
        VoxelKey {
            x: (p.x / resolution).floor() as i64,
            y: (p.y / resolution).floor() as i64,
            z: (p.z / resolution).floor() as i64,
        }
    }
}

fn check_resolution(resolution: f64) -> Result<()> {
    if resolution > 0.0 && resolution.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "voxel resolution must be positive, got {resolution}"
        )))
    }
}

/// Groups point indices by voxel, in ascending key order. Members of each
/// voxel are sorted canonically (by coordinates, then by the remaining
/// channels) so aggregation does not depend on input order.
pub fn voxel_groups(cloud: &PointCloud, resolution: f64) -> Result<Vec<(VoxelKey, Vec<usize>)>> {
    check_resolution(resolution)?;
    cloud.check_finite()?;
    let mut map: BTreeMap<VoxelKey, Vec<usize>> = BTreeMap::new();
    for (i, p) in cloud.points().iter().enumerate() {
        map.entry(VoxelKey::of(*p, resolution)).or_default().push(i);
    }
    let cmp = canonical_cmp(cloud);
    Ok(map
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(|&a, &b| cmp(a, b));
            (k, v)
        })
        .collect())
}

fn canonical_cmp(cloud: &PointCloud) -> impl Fn(usize, usize) -> Ordering + '_ {
    fn vec_cmp(a: Vec3, b: Vec3) -> Ordering {
        a.z.total_cmp(&b.z).then(a.y.total_cmp(&b.y)).then(a.x.total_cmp(&b.x))
    }
    move |a, b| {
        let pts = cloud.points();
        let mut ord = vec_cmp(pts[a], pts[b]);
        if let Some(l) = cloud.labels() {
            ord = ord
                .then(l[a].radius.total_cmp(&l[b].radius))
                .then(vec_cmp(l[a].direction, l[b].direction))
                .then(l[a].branch_id.cmp(&l[b].branch_id));
        }
        if let Some(c) = cloud.colors() {
            ord = ord.then(c[a].cmp(&c[b]));
        }
        ord
    }
}

/// Replaces each occupied voxel of side `resolution` by the centroid of its
/// points. Labels are averaged (direction re-normalised, branch id by
/// majority with ties to the smaller id); colours are averaged. Output is in
/// ascending voxel-key order.
pub fn voxel_downsample(cloud: &PointCloud, resolution: f64) -> Result<PointCloud> {
    let groups = voxel_groups(cloud, resolution)?;
    let pts = cloud.points();
    let mut points = Vec::with_capacity(groups.len());
    for (key, members) in &groups {
        if let [single] = members.as_slice() {
            points.push(pts[*single]);
        } else {
            let c = mean(members.iter().map(|&i| pts[i]));
            points.push(clamp_into_voxel(c, *key, resolution));
        }
    }
    let mut out = PointCloud::new(points);
    if let Some(labels) = cloud.labels() {
        let merged = groups.iter().map(|(_, m)| merge_labels(labels, m)).collect();
        out = out.with_labels(merged)?;
    }
    if let Some(colors) = cloud.colors() {
        let merged = groups.iter().map(|(_, m)| merge_colors(colors, m)).collect();
        out = out.with_colors(merged)?;
    }
    Ok(out)
}

fn mean(it: impl ExactSizeIterator<Item = Vec3>) -> Vec3 {
    let n = it.len() as f64;
    let mut s = Vec3::ZERO;
    for p in it {
        s += p;
    }
    s / n
}

/// Rounding can push a centroid an ulp outside its voxel; step it back so a
/// second pass at the same resolution sees the same key.
fn clamp_into_voxel(mut c: Point3, key: VoxelKey, resolution: f64) -> Point3 {
    fn fix(v: &mut f64, k: i64, resolution: f64) {
        for _ in 0..64 {
            let got = (*v / resolution).floor() as i64;
            match got.cmp(&k) {
                Ordering::Equal => return,
                Ordering::Less => *v = v.next_up(),
                Ordering::Greater => *v = v.next_down(),
            }
        }
    }
    fix(&mut c.x, key.x, resolution);
    fix(&mut c.y, key.y, resolution);
    fix(&mut c.z, key.z, resolution);
    c
}

fn merge_labels(labels: &[GroundTruthLabel], members: &[usize]) -> GroundTruthLabel {
    if let [single] = members {
        return labels[*single];
    }
    let n = members.len() as f64;
    let radius = members.iter().map(|&i| labels[i].radius).sum::<f64>() / n;
    let mut dsum = Vec3::ZERO;
    for &i in members {
        dsum += labels[i].direction;
    }
    let direction = dsum.try_normalize().unwrap_or(labels[members[0]].direction);
    let mut votes: BTreeMap<u32, usize> = BTreeMap::new();
    for &i in members {
        *votes.entry(labels[i].branch_id).or_default() += 1;
    }
    // max_by_key keeps the last maximum; iterate descending ids so the
    // smallest id wins ties.
    let branch_id = votes
        .iter()
        .rev()
        .max_by_key(|(_, &c)| c)
        .map(|(&b, _)| b)
        .expect("non-empty voxel");
    GroundTruthLabel {
        radius,
        direction,
        branch_id,
    }
}

fn merge_colors(colors: &[[u8; 3]], members: &[usize]) -> [u8; 3] {
    let n = members.len() as u32;
    let mut s = [0u32; 3];
    for &i in members {
        for c in 0..3 {
            s[c] += colors[i][c] as u32;
        }
    }
    s.map(|v| ((v + n / 2) / n) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn empty_cloud() {
        let out = voxel_downsample(&PointCloud::default(), 0.01).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn same_voxel_centroid() {
        let c = PointCloud::new(vec![Vec3::ZERO, Vec3::new(0.004, 0.0, 0.0)]);
        let out = voxel_downsample(&c, 0.01).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.points()[0].x - 0.002).abs() < 1e-15);
        assert_eq!(out.points()[0].y, 0.0);
    }

    /// Independent grouping: count distinct floor keys with a HashSet-free
    /// sorted dedup over explicitly computed integer triples.
    fn brute_force_count(points: &[Vec3], res: f64) -> usize {
        let mut keys: Vec<(i64, i64, i64)> = points
            .iter()
            .map(|p| {
                (
                    (p.x / res).floor() as i64,
                    (p.y / res).floor() as i64,
                    (p.z / res).floor() as i64,
                )
            })
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    }

    #[test]
    fn grid_with_coarser_spacing_is_unchanged() {
        // Offset by half a voxel so no point sits on a voxel boundary.
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    pts.push(Vec3::new(
                        0.005 + 0.02 * i as f64,
                        0.005 + 0.02 * j as f64,
                        0.005 + 0.02 * k as f64,
                    ));
                }
            }
        }
        assert_eq!(brute_force_count(&pts, 0.01), 1000);
        let out = voxel_downsample(&PointCloud::new(pts), 0.01).unwrap();
        assert_eq!(out.len(), 1000);
    }

    #[test]
    fn rejects_bad_input() {
        let c = PointCloud::new(vec![Vec3::new(f64::INFINITY, 0.0, 0.0)]);
        assert!(matches!(voxel_downsample(&c, 0.01), Err(Error::InvalidInput(_))));
        assert!(voxel_downsample(&PointCloud::default(), 0.0).is_err());
    }

    #[test]
    fn output_is_key_ordered() {
        let c = PointCloud::new(vec![
            Vec3::new(0.0, 0.0, 0.5),
            Vec3::new(0.5, 0.0, 0.0),
            Vec3::new(0.0, 0.5, 0.0),
        ]);
        let out = voxel_downsample(&c, 0.1).unwrap();
        let keys: Vec<_> = out.points().iter().map(|p| VoxelKey::of(*p, 0.1)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(out.points()[0], Vec3::new(0.5, 0.0, 0.0));
    }

    #[test]
    fn labels_merge_by_mean_and_majority() {
        let mk = |r, d, b| GroundTruthLabel {
            radius: r,
            direction: d,
            branch_id: b,
        };
        let c = PointCloud::labelled(
            vec![Vec3::ZERO, Vec3::new(0.001, 0.0, 0.0), Vec3::new(0.002, 0.0, 0.0)],
            vec![mk(0.1, Vec3::X, 7), mk(0.2, Vec3::Y, 2), mk(0.3, Vec3::X, 7)],
        )
        .unwrap();
        let out = voxel_downsample(&c, 0.01).unwrap();
        let l = out.labels().unwrap()[0];
        assert!((l.radius - 0.2).abs() < 1e-15);
        assert_eq!(l.branch_id, 7);
        assert!((l.direction.norm() - 1.0).abs() < 1e-12);
        assert!((l.direction.x - 2.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn majority_tie_goes_to_smaller_id() {
        let mk = |b| GroundTruthLabel {
            radius: 0.1,
            direction: Vec3::Z,
            branch_id: b,
        };
        let c = PointCloud::labelled(vec![Vec3::ZERO, Vec3::new(0.001, 0.0, 0.0)], vec![mk(9), mk(4)]).unwrap();
        let out = voxel_downsample(&c, 0.01).unwrap();
        assert_eq!(out.labels().unwrap()[0].branch_id, 4);
    }

    fn cloud_strategy() -> impl Strategy<Value = Vec<Vec3>> {
        prop::collection::vec(
            (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y, z)| Vec3::new(x, y, z)),
            0..300,
        )
    }

    proptest! {
        #[test]
        fn count_matches_distinct_keys(pts in cloud_strategy(), res in 0.01f64..0.5) {
            let out = voxel_downsample(&PointCloud::new(pts.clone()), res).unwrap();
            prop_assert_eq!(out.len(), brute_force_count(&pts, res));
        }

        #[test]
        fn idempotent(pts in cloud_strategy(), res in 0.01f64..0.5) {
            let once = voxel_downsample(&PointCloud::new(pts), res).unwrap();
            let twice = voxel_downsample(&once, res).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn permutation_invariant(pts in cloud_strategy(), res in 0.05f64..0.5, seed in any::<u64>()) {
            let mut shuffled = pts.clone();
            // Deterministic Fisher-Yates driven by a tiny LCG.
            let mut s = seed | 1;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (s >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            let a = voxel_downsample(&PointCloud::new(pts), res).unwrap();
            let b = voxel_downsample(&PointCloud::new(shuffled), res).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn one_point_per_voxel(pts in cloud_strategy(), res in 0.01f64..0.5) {
            let out = voxel_downsample(&PointCloud::new(pts), res).unwrap();
            let keys: BTreeSet<_> = out.points().iter().map(|p| VoxelKey::of(*p, res)).collect();
            prop_assert_eq!(keys.len(), out.len());
        }
    }
}

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{PointCloud, Skeleton};

/// Drops every branch whose largest radius is below `min_radius` or whose
/// arc length (including the link to its parent branch) is below
/// `min_length`, together with everything that grows from it. Returns the
/// pruned skeleton and the ids of the removed branches.
pub fn prune_skeleton(skeleton: &Skeleton, min_radius: f64, min_length: f64) -> (Skeleton, BTreeSet<u32>) {
    let index = skeleton.index_of();
    let mut max_radius: BTreeMap<u32, f64> = BTreeMap::new();
    let mut length: BTreeMap<u32, f64> = BTreeMap::new();
    for n in &skeleton.nodes {
        let r = max_radius.entry(n.branch_id).or_insert(f64::NEG_INFINITY);
        *r = r.max(n.radius);
        length.entry(n.branch_id).or_insert(0.0);
    }
    for e in skeleton.edges() {
        *length.get_mut(&e.branch_id).expect("branch seen") += e.length();
    }

    let mut removed: BTreeSet<u32> = max_radius
        .keys()
        .copied()
        .filter(|b| max_radius[b] < min_radius || length[b] < min_length)
        .collect();

    // Parents precede children, so one pass propagates removal downwards.
    let mut dropped = vec![false; skeleton.len()];
    for i in skeleton.topological_order() {
        let n = &skeleton.nodes[i];
        let parent_dropped = n.parent.and_then(|p| index.get(&p)).is_some_and(|&pi| dropped[pi]);
        if parent_dropped {
            removed.insert(n.branch_id);
        }
        dropped[i] = parent_dropped || removed.contains(&n.branch_id);
    }
    // A branch removed late in the walk may have had nodes kept earlier.
    let nodes = skeleton
        .nodes
        .iter()
        .filter(|n| !removed.contains(&n.branch_id))
        .copied()
        .collect();
    (Skeleton::new(nodes), removed)
}

/// Prunes the skeleton as [`prune_skeleton`] does and removes the cloud
/// points labelled with a removed branch. Unlabelled clouds pass through.
pub fn prune_ground_truth(
    skeleton: &Skeleton,
    cloud: &PointCloud,
    min_radius: f64,
    min_length: f64,
) -> (Skeleton, PointCloud) {
    let (pruned, removed) = prune_skeleton(skeleton, min_radius, min_length);
    let cloud = match cloud.labels() {
        Some(labels) if !removed.is_empty() => cloud.filter_indices(|i| !removed.contains(&labels[i].branch_id)),
        _ => cloud.clone(),
    };
    (pruned, cloud)
}

use std::cmp::Ordering;

use super::graph::NeighborGraph;
use super::sssp::ShortestPaths;
use crate::model::{Point3, Skeleton, SkeletonNode};
use crate::spatial::KdTree;

/// Extraction tunables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractParams {
    /// Allocation reach as a multiple of the interpolated path radius.
    pub allocation_factor: f64,
    /// Paths with fewer new vertices are allocated but not emitted.
    pub min_path_nodes: usize,
}

/// Polyline vertex used for allocation: position, radius, owning node.
#[derive(Clone, Copy)]
struct Knot {
    position: Point3,
    radius: f64,
    owner: Option<usize>,
}

/// Greedy path extraction over one shortest-path tree.
///
/// Node ids start at 0 and branch ids count emitted paths from 0. Every
/// emitted node position is a vertex position of `graph`.
pub fn extract_paths(graph: &NeighborGraph, sp: &ShortestPaths, params: ExtractParams) -> Skeleton {
    extract(graph, sp, params).0
}

/// The skeleton and the final allocation flag of every component vertex.
fn extract(graph: &NeighborGraph, sp: &ShortestPaths, params: ExtractParams) -> (Skeleton, Vec<bool>) {
    let m = sp.vertices.len();
    let pos: Vec<Point3> = sp.vertices.iter().map(|&v| graph.positions()[v]).collect();
    let rad: Vec<f64> = sp.vertices.iter().map(|&v| graph.radii()[v]).collect();
    let pred: Vec<Option<usize>> = sp
        .predecessor
        .iter()
        .map(|p| p.map(|v| sp.local(v).expect("predecessor inside component")))
        .collect();
    let tree = KdTree::new(&pos);

    // Farthest first; unreachable vertices (infinite distance) lead, each
    // becoming its own path start, which keeps allocation total.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| match sp.distance[b].total_cmp(&sp.distance[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });

    let mut allocated = vec![false; m];
    let mut owner: Vec<Option<usize>> = vec![None; m];
    let mut nodes: Vec<SkeletonNode> = Vec::new();
    let mut next_branch = 0u32;
    let mut walk = Vec::new();
    let mut knots = Vec::new();

    for &tip in &order {
        if allocated[tip] {
            continue;
        }
        walk.clear();
        walk.push(tip);
        let mut junction = None;
        let mut cur = tip;
        while let Some(p) = pred[cur] {
            if allocated[p] {
                junction = Some(p);
                break;
            }
            walk.push(p);
            cur = p;
        }
        walk.reverse();

        let attach = junction.and_then(|j| owner[j]);
        if walk.len() >= params.min_path_nodes {
            let branch = next_branch;
            next_branch += 1;
            let mut parent = attach;
            for &v in &walk {
                let id = nodes.len();
                nodes.push(SkeletonNode {
                    id,
                    position: pos[v],
                    radius: rad[v],
                    parent,
                    branch_id: branch,
                });
                parent = Some(id);
                owner[v] = Some(id);
                allocated[v] = true;
            }
        } else {
            for &v in &walk {
                owner[v] = attach;
                allocated[v] = true;
            }
        }

        knots.clear();
        knots.extend(junction.into_iter().chain(walk.iter().copied()).map(|v| Knot {
            position: pos[v],
            radius: rad[v],
            owner: owner[v],
        }));
        allocate_near(
            &tree,
            &pos,
            &knots,
            params.allocation_factor,
            &mut allocated,
            &mut owner,
        );
    }
    (Skeleton::new(nodes), allocated)
}

/// Marks every unallocated vertex within `factor` × the linearly
/// interpolated radius of the polyline. A vertex is owned by the nearer end
/// of the first segment that claims it.
fn allocate_near(
    tree: &KdTree,
    pos: &[Point3],
    knots: &[Knot],
    factor: f64,
    allocated: &mut [bool],
    owner: &mut [Option<usize>],
) {
    let mut claim = |a: Knot, b: Knot| {
        let ab = b.position - a.position;
        let len2 = ab.norm_squared();
        let mid = (a.position + b.position) * 0.5;
        let reach = 0.5 * len2.sqrt() + factor * a.radius.max(b.radius);
        // Padded so boundary vertices reach the exact test below.
        tree.for_each_within(mid, reach * (1.0 + 1e-9) + 1e-12, |v, _| {
            if allocated[v] {
                return;
            }
            let t = if len2 > 0.0 {
                ((pos[v] - a.position).dot(ab) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let foot = a.position + ab * t;
            let r = a.radius + (b.radius - a.radius) * t;
            if pos[v].distance(foot) <= factor * r {
                allocated[v] = true;
                owner[v] = if t < 0.5 { a.owner } else { b.owner };
            }
        });
    };
    match knots {
        [] => {}
        [only] => claim(*only, *only),
        _ => {
            for w in knots.windows(2) {
                claim(w[0], w[1]);
            }
        }
    }
}

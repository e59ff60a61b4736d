//! Static k-d tree over 3D points.
//!
//! All queries break distance ties by the smaller point index, so results are
//! identical to a brute-force scan using the same distance formula
//! ([`Vec3::distance_squared`]).

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::Vec3;

const LEAF_SIZE: usize = 12;

/// Leaf visitor: slot within the leaf arrays, then points, ids and weights.
type Visit<'a> = dyn FnMut(usize, &[Vec3], &[u32], &[f64]) + 'a;

#[derive(Debug, Clone)]
struct Node {
    lo: Vec3,
    hi: Vec3,
    start: u32,
    end: u32,
    /// Child node indices; `None` for leaves.
    children: Option<(u32, u32)>,
    max_weight: f64,
}

impl Node {
    /// Squared distance from `q` to the node's bounding box.
    #[inline]
    fn box_distance_squared(&self, q: Vec3) -> f64 {
        let f = |v: f64, lo: f64, hi: f64| {
            let d = if v < lo {
                lo - v
            } else if v > hi {
                v - hi
            } else {
                0.0
            };
            d * d
        };
        f(q.x, self.lo.x, self.hi.x) + f(q.y, self.lo.y, self.hi.y) + f(q.z, self.lo.z, self.hi.z)
    }
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    ids: Vec<u32>,
    weights: Vec<f64>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        Self::build(points, None)
    }

    /// A tree whose points carry positive weights, enabling
    /// [`KdTree::nearest_relative`].
    pub fn with_weights(points: &[Vec3], weights: &[f64]) -> Self {
        assert_eq!(points.len(), weights.len(), "one weight per point");
        Self::build(points, Some(weights))
    }

    fn build(points: &[Vec3], weights: Option<&[f64]>) -> Self {
        let mut ids: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            build_node(points, &mut ids, 0, points.len(), &mut nodes);
        }
        let pts: Vec<Vec3> = ids.iter().map(|&i| points[i as usize]).collect();
        let w: Vec<f64> = match weights {
            Some(w) => ids.iter().map(|&i| w[i as usize]).collect(),
            None => vec![1.0; points.len()],
        };
        let mut tree = KdTree {
            points: pts,
            ids,
            weights: w,
            nodes,
        };
        if !tree.nodes.is_empty() {
            tree.fill_max_weight(0);
        }
        tree
    }

    fn fill_max_weight(&mut self, n: usize) -> f64 {
        let m = match self.nodes[n].children {
            Some((l, r)) => self.fill_max_weight(l as usize).max(self.fill_max_weight(r as usize)),
            None => {
                let (s, e) = (self.nodes[n].start as usize, self.nodes[n].end as usize);
                self.weights[s..e].iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        };
        self.nodes[n].max_weight = m;
        m
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Calls `f(index, distance)` for every point strictly closer than
    /// `radius`, in unspecified order.
    pub fn for_each_within(&self, q: Vec3, radius: f64, mut f: impl FnMut(usize, f64)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if node.box_distance_squared(q).sqrt() >= radius {
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    stack.push(l);
                    stack.push(r);
                }
                None => {
                    for s in node.start as usize..node.end as usize {
                        let d = q.distance_squared(self.points[s]).sqrt();
                        if d < radius {
                            f(self.ids[s] as usize, d);
                        }
                    }
                }
            }
        }
    }

    /// Points strictly closer than `radius`, as `(index, distance)` sorted by
    /// index.
    pub fn within(&self, q: Vec3, radius: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.for_each_within(q, radius, |i, d| out.push((i, d)));
        out.sort_unstable_by_key(|&(i, _)| i);
        out
    }

    /// Euclidean nearest neighbour as `(index, distance)`.
    pub fn nearest(&self, q: Vec3) -> Option<(usize, f64)> {
        let best = Cell::new((f64::INFINITY, u32::MAX));
        self.descend(
            q,
            &|node| node.box_distance_squared(q) > best.get().0,
            &mut |s, pts, ids, _| {
                let d2 = q.distance_squared(pts[s]);
                if (d2, ids[s]) < best.get() {
                    best.set((d2, ids[s]));
                }
            },
        );
        let (d2, id) = best.get();
        (id != u32::MAX).then(|| (id as usize, d2.sqrt()))
    }

    /// The point minimising `distance / weight`, as `(index, distance)`.
    pub fn nearest_relative(&self, q: Vec3) -> Option<(usize, f64)> {
        let best = Cell::new((f64::INFINITY, u32::MAX, f64::INFINITY));
        self.descend(
            q,
            &|node| node.box_distance_squared(q).sqrt() / node.max_weight > best.get().0,
            &mut |s, pts, ids, w| {
                let d = q.distance_squared(pts[s]).sqrt();
                let rel = d / w[s];
                let (br, bi, _) = best.get();
                if (rel, ids[s]) < (br, bi) {
                    best.set((rel, ids[s], d));
                }
            },
        );
        let (_, id, d) = best.get();
        (id != u32::MAX).then_some((id as usize, d))
    }

    /// The `k` nearest points as `(index, distance)`, sorted by distance then
    /// index.
    pub fn knn(&self, q: Vec3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        let bound = Cell::new(f64::INFINITY);
        self.descend(
            q,
            &|node| node.box_distance_squared(q) > bound.get(),
            &mut |s, pts, ids, _| {
                let c = Candidate {
                    d2: q.distance_squared(pts[s]),
                    id: ids[s],
                };
                if heap.len() < k {
                    heap.push(c);
                } else if c < *heap.peek().expect("full heap") {
                    heap.pop();
                    heap.push(c);
                }
                if heap.len() == k {
                    bound.set(heap.peek().expect("full heap").d2);
                }
            },
        );
        heap.into_sorted_vec()
            .into_iter()
            .map(|c| (c.id as usize, c.d2.sqrt()))
            .collect()
    }

    /// Depth-first traversal visiting the child nearer to `q` first.
    fn descend(&self, q: Vec3, prune: &dyn Fn(&Node) -> bool, visit: &mut Visit<'_>) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if prune(node) {
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    let dl = self.nodes[l as usize].box_distance_squared(q);
                    let dr = self.nodes[r as usize].box_distance_squared(q);
                    if dl <= dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                None => {
                    for s in node.start as usize..node.end as usize {
                        visit(s, &self.points, &self.ids, &self.weights);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    d2: f64,
    id: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Candidate {
    fn cmp(&self, o: &Self) -> Ordering {
        self.d2.total_cmp(&o.d2).then(self.id.cmp(&o.id))
    }
}

fn build_node(points: &[Vec3], ids: &mut [u32], start: usize, end: usize, nodes: &mut Vec<Node>) -> u32 {
    let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for &i in &ids[start..end] {
        let p = points[i as usize];
        lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    let me = nodes.len() as u32;
    nodes.push(Node {
        lo,
        hi,
        start: start as u32,
        end: end as u32,
        children: None,
        max_weight: 0.0,
    });
    if end - start <= LEAF_SIZE {
        return me;
    }
    let ext = hi - lo;
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    let coord = |i: u32| points[i as usize].to_array()[axis];
    let mid = (end - start) / 2;
    ids[start..end].select_nth_unstable_by(mid, |&a, &b| coord(a).total_cmp(&coord(b)).then(a.cmp(&b)));
    let l = build_node(points, ids, start, start + mid, nodes);
    let r = build_node(points, ids, start + mid, end, nodes);
    nodes[me as usize].children = Some((l, r));
    me
}

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::vec3::Point3;

/// A radius-annotated skeleton vertex. `branch_id` groups nodes into the
/// polylines (branches) they were generated or extracted as.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonNode {
    pub id: usize,
    pub position: Point3,
    pub radius: f64,
    pub parent: Option<usize>,
    pub branch_id: u32,
}

/// A forest of nodes linked child → parent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Skeleton {
    pub nodes: Vec<SkeletonNode>,
}

/// One parent→child link, with endpoint positions and radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub parent: usize,
    pub child: usize,
    pub from: Point3,
    pub to: Point3,
    pub from_radius: f64,
    pub to_radius: f64,
    pub branch_id: u32,
}

impl Edge {
    pub fn length(&self) -> f64 {
        self.from.distance(self.to)
    }
}

impl Skeleton {
    pub fn new(nodes: Vec<SkeletonNode>) -> Self {
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Ids of the nodes without a parent, in node order.
    pub fn roots(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.parent.is_none()).map(|n| n.id).collect()
    }

    /// Map from node id to its position in `nodes`.
    pub fn index_of(&self) -> HashMap<usize, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect()
    }

    pub fn node(&self, id: usize) -> Option<&SkeletonNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Every link whose parent exists, in node order.
    pub fn edges(&self) -> Vec<Edge> {
        let index = self.index_of();
        self.nodes
            .iter()
            .filter_map(|n| {
                let p = &self.nodes[*index.get(&n.parent?)?];
                Some(Edge {
                    parent: p.id,
                    child: n.id,
                    from: p.position,
                    to: n.position,
                    from_radius: p.radius,
                    to_radius: n.radius,
                    branch_id: n.branch_id,
                })
            })
            .collect()
    }

    /// Total length of all links.
    pub fn arc_length(&self) -> f64 {
        self.edges().iter().map(Edge::length).sum()
    }

    /// Node ids grouped by branch, in ascending branch id.
    pub fn branches(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for n in &self.nodes {
            out.entry(n.branch_id).or_default().push(n.id);
        }
        out
    }

    /// Re-derives branch ids from topology alone: a new branch starts at each
    /// root and at every child that is not its parent's first (lowest-id)
    /// child. Used when a skeleton arrives without branch annotations.
    pub fn assign_structural_branches(&mut self) {
        let index = self.index_of();
        let mut first_child: HashMap<usize, usize> = HashMap::new();
        for n in &self.nodes {
            if let Some(p) = n.parent {
                let e = first_child.entry(p).or_insert(n.id);
                *e = (*e).min(n.id);
            }
        }
        // Walk in an order where parents precede children.
        let order = self.topological_order();
        let mut branch = vec![u32::MAX; self.nodes.len()];
        let mut next = 0u32;
        for i in order {
            let n = &self.nodes[i];
            let inherited = n.parent.and_then(|p| {
                let pi = *index.get(&p)?;
                (first_child.get(&p) == Some(&n.id)).then_some(branch[pi])
            });
            branch[i] = match inherited {
                Some(b) if b != u32::MAX => b,
                _ => {
                    next += 1;
                    next - 1
                }
            };
        }
        for (n, b) in self.nodes.iter_mut().zip(branch) {
            n.branch_id = b;
        }
    }

    /// Node indices ordered so that every parent precedes its children.
    /// Nodes on cycles or under missing parents are appended at the end.
    pub fn topological_order(&self) -> Vec<usize> {
        let index = self.index_of();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        let mut starts = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            match n.parent.and_then(|p| index.get(&p)) {
                Some(&pi) if pi != i => children[pi].push(i),
                _ => starts.push(i),
            }
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack: Vec<usize> = starts.into_iter().rev().collect();
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                continue;
            }
            order.push(i);
            stack.extend(children[i].iter().rev().copied());
        }
        order.extend((0..self.nodes.len()).filter(|&i| !seen[i]));
        order
    }
}

/// A broken skeleton invariant, naming the offending node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateId {
        node: usize,
    },
    MissingParent {
        node: usize,
        parent: usize,
    },
    /// A parent chain returns to itself; `node` is the smallest id on the loop.
    Cycle {
        node: usize,
    },
    NonPositiveRadius {
        node: usize,
    },
    NonFinitePosition {
        node: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { node } => write!(f, "node {node}: duplicate id"),
            Violation::MissingParent { node, parent } => {
                write!(f, "node {node}: parent {parent} does not exist")
            }
            Violation::Cycle { node } => write!(f, "node {node}: parent links form a cycle"),
            Violation::NonPositiveRadius { node } => {
                write!(f, "node {node}: radius must be positive")
            }
            Violation::NonFinitePosition { node } => {
                write!(f, "node {node}: position is not finite")
            }
        }
    }
}

/// Lists every invariant violation; empty iff the skeleton is a valid forest.
pub fn skeleton_validate(skeleton: &Skeleton) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut index: HashMap<usize, usize> = HashMap::with_capacity(skeleton.len());
    for (i, n) in skeleton.nodes.iter().enumerate() {
        if index.insert(n.id, i).is_some() {
            out.push(Violation::DuplicateId { node: n.id });
        }
    }
    for n in &skeleton.nodes {
        if !(n.radius > 0.0 && n.radius.is_finite()) {
            out.push(Violation::NonPositiveRadius { node: n.id });
        }
        if !n.position.is_finite() {
            out.push(Violation::NonFinitePosition { node: n.id });
        }
        if let Some(p) = n.parent {
            if !index.contains_key(&p) {
                out.push(Violation::MissingParent { node: n.id, parent: p });
            }
        }
    }

    // 0 = unvisited, 1 = on the current walk, 2 = finished.
    let mut state = vec![0u8; skeleton.len()];
    for start in 0..skeleton.len() {
        let mut walk: Vec<usize> = Vec::new();
        let mut cur = Some(start);
        while let Some(i) = cur {
            match state[i] {
                2 => break,
                1 => {
                    let pos = walk.iter().position(|&w| w == i).expect("on walk");
                    let node = walk[pos..]
                        .iter()
                        .map(|&w| skeleton.nodes[w].id)
                        .min()
                        .expect("non-empty loop");
                    out.push(Violation::Cycle { node });
                    break;
                }
                _ => {
                    state[i] = 1;
                    walk.push(i);
                    cur = skeleton.nodes[i].parent.and_then(|p| index.get(&p).copied());
                }
            }
        }
        for w in walk {
            state[w] = 2;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Vec3;

    fn node(id: usize, parent: Option<usize>, radius: f64) -> SkeletonNode {
        SkeletonNode {
            id,
            position: Vec3::new(0.0, 0.0, id as f64),
            radius,
            parent,
            branch_id: 0,
        }
    }

    #[test]
    fn single_root_is_valid() {
        let s = Skeleton::new(vec![node(0, None, 0.1)]);
        assert!(skeleton_validate(&s).is_empty());
        assert_eq!(s.roots(), vec![0]);
    }

    #[test]
    fn self_parent_is_one_cycle() {
        let s = Skeleton::new(vec![node(0, None, 0.1), node(4, Some(4), 0.1)]);
        assert_eq!(skeleton_validate(&s), vec![Violation::Cycle { node: 4 }]);
    }

    #[test]
    fn zero_radius_is_one_violation() {
        let s = Skeleton::new(vec![node(0, None, 0.1), node(1, Some(0), 0.0)]);
        assert_eq!(skeleton_validate(&s), vec![Violation::NonPositiveRadius { node: 1 }]);
    }

    #[test]
    fn longer_cycle_and_missing_parent() {
        let s = Skeleton::new(vec![
            node(5, Some(6), 0.1),
            node(6, Some(7), 0.1),
            node(7, Some(5), 0.1),
            node(8, Some(99), 0.1),
        ]);
        let v = skeleton_validate(&s);
        assert!(v.contains(&Violation::Cycle { node: 5 }));
        assert!(v.contains(&Violation::MissingParent { node: 8, parent: 99 }));
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|x| x.to_string().starts_with("node ")));
    }

    #[test]
    fn duplicate_ids_reported() {
        let s = Skeleton::new(vec![node(1, None, 0.1), node(1, None, 0.1)]);
        assert_eq!(skeleton_validate(&s), vec![Violation::DuplicateId { node: 1 }]);
    }

    #[test]
    fn structural_branches() {
        // 0 - 1 - 2 with a side child 3 of node 1.
        let mut s = Skeleton::new(vec![
            node(0, None, 0.1),
            node(1, Some(0), 0.1),
            node(2, Some(1), 0.1),
            node(3, Some(1), 0.1),
        ]);
        s.assign_structural_branches();
        let b: Vec<u32> = s.nodes.iter().map(|n| n.branch_id).collect();
        assert_eq!(b[0], b[1]);
        assert_eq!(b[1], b[2]);
        assert_ne!(b[3], b[2]);
    }

    #[test]
    fn edges_and_arc_length() {
        let s = Skeleton::new(vec![node(0, None, 0.1), node(1, Some(0), 0.1), node(2, Some(1), 0.1)]);
        assert_eq!(s.edges().len(), 2);
        assert!((s.arc_length() - 2.0).abs() < 1e-12);
    }
}

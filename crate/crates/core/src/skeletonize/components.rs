use super::graph::NeighborGraph;
use crate::model::Point3;

/// Connected components split by size.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Components {
    /// Components with at least `min_points` vertices, largest first.
    pub kept: Vec<Vec<usize>>,
    /// Smaller components, same ordering.
    pub residue: Vec<Vec<usize>>,
}

impl Components {
    pub fn residue_points(&self) -> usize {
        self.residue.iter().map(Vec::len).sum()
    }
}

/// Partitions the vertices into maximal connected sets.
///
/// Each set is ascending; sets are ordered by size descending, then by
/// their smallest index.
pub fn connected_components(graph: &NeighborGraph, min_points: usize) -> Components {
    let n = graph.len();
    let mut seen = vec![false; n];
    let mut all = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for (u, _) in graph.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        all.push(comp);
    }
    // Discovery order already ascends by smallest member, so a stable sort
    // on size alone gives the required tie-break.
    all.sort_by_key(|c| std::cmp::Reverse(c.len()));
    let (kept, residue) = all.into_iter().partition(|c| c.len() >= min_points);
    Components { kept, residue }
}

/// Lowest vertex of `component`; ties go to the smallest index.
///
/// Panics on an empty component.
pub fn select_root(component: &[usize], positions: &[Point3]) -> usize {
    let mut best = component[0];
    for &v in &component[1..] {
        let (z, bz) = (positions[v].z, positions[best].z);
        if z < bz || (z == bz && v < best) {
            best = v;
        }
    }
    best
}

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::graph::NeighborGraph;
use crate::error::{Error, Result};

/// Shortest-path tree of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPaths {
    pub root: usize,
    /// Component vertices, ascending. The other vectors align with this one.
    pub vertices: Vec<usize>,
    pub distance: Vec<f64>,
    /// Predecessor vertex id (graph index); `None` only for the root.
    pub predecessor: Vec<Option<usize>>,
}

impl ShortestPaths {
    /// Position of graph vertex `v` within [`ShortestPaths::vertices`].
    pub fn local(&self, v: usize) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn distance_of(&self, v: usize) -> Option<f64> {
        self.local(v).map(|i| self.distance[i])
    }
}

/// Dense lookup from graph index to component-local index.
struct LocalIndex {
    base: usize,
    map: Vec<u32>,
}

impl LocalIndex {
    const ABSENT: u32 = u32::MAX;

    fn new(sorted: &[usize]) -> Self {
        let base = sorted.first().copied().unwrap_or(0);
        let span = sorted.last().map_or(0, |&l| l - base + 1);
        let mut map = vec![Self::ABSENT; span];
        for (i, &v) in sorted.iter().enumerate() {
            map[v - base] = i as u32;
        }
        Self { base, map }
    }

    fn get(&self, v: usize) -> Option<usize> {
        let k = v.checked_sub(self.base)?;
        match self.map.get(k) {
            Some(&i) if i != Self::ABSENT => Some(i as usize),
            _ => None,
        }
    }
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    local: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.dist.total_cmp(&self.dist).then(o.local.cmp(&self.local))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Dijkstra from `root` restricted to `component`.
///
/// Among equal-length predecessors the smallest vertex index wins. Vertices
/// of `component` unreachable inside it keep distance `+∞` and no
/// predecessor.
pub fn sssp(graph: &NeighborGraph, component: &[usize], root: usize) -> Result<ShortestPaths> {
    let mut vertices = component.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    let index = LocalIndex::new(&vertices);
    let Some(root_local) = index.get(root) else {
        return Err(Error::invalid(format!("root {root} is not in the component")));
    };

    let m = vertices.len();
    let mut distance = vec![f64::INFINITY; m];
    let mut predecessor: Vec<Option<usize>> = vec![None; m];
    let mut settled = vec![false; m];
    let mut heap = BinaryHeap::new();
    distance[root_local] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        local: root_local,
    });

    while let Some(Entry { dist, local }) = heap.pop() {
        if settled[local] {
            continue;
        }
        settled[local] = true;
        let u = vertices[local];
        for (v, w) in graph.neighbors(u) {
            let Some(lv) = index.get(v) else { continue };
            // Settled targets are final; updating them could close a cycle
            // through zero-weight edges.
            if settled[lv] {
                continue;
            }
            let nd = dist + w;
            if nd < distance[lv] {
                distance[lv] = nd;
                predecessor[lv] = Some(u);
                heap.push(Entry { dist: nd, local: lv });
            } else if nd == distance[lv] && predecessor[lv].is_some_and(|p| u < p) {
                predecessor[lv] = Some(u);
            }
        }
    }
    Ok(ShortestPaths {
        root,
        vertices,
        distance,
        predecessor,
    })
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::MedialField;
use crate::model::{Point3, PointCloud};
use crate::spatial::KdTree;

/// Which endpoint radius bounds an edge's length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdmissionRule {
    /// `d < min(rᵢ, rⱼ)`.
    #[default]
    Min,
    /// `d < max(rᵢ, rⱼ)`.
    Max,
    /// `d < rᵢ` from either side. The union of both directions, which makes
    /// it the same edge set as [`AdmissionRule::Max`].
    Source,
}

/// Weighted undirected graph over medial points, stored as compressed rows
/// sorted by neighbour index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    positions: Vec<Point3>,
    radii: Vec<f64>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
}

impl NeighborGraph {
    /// Builds a graph from explicit undirected edges `(i, j, weight)`.
    /// Duplicate edges keep the smallest weight; self-loops are dropped.
    pub fn from_edges(positions: Vec<Point3>, radii: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = positions.len();
        if radii.len() != n {
            return Err(Error::invalid("positions and radii differ in length"));
        }
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("edge ({i}, {j}) out of range")));
            }
            if i != j {
                adj[i].push((j as u32, w));
                adj[j].push((i as u32, w));
            }
        }
        for row in &mut adj {
            row.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            row.dedup_by_key(|e| e.0);
        }
        Ok(Self::from_rows(positions, radii, adj))
    }

    fn from_rows(positions: Vec<Point3>, radii: Vec<f64>, rows: Vec<Vec<(u32, f64)>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let total: usize = rows.iter().map(Vec::len).sum();
        let mut neighbors = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for row in rows {
            for (j, w) in row {
                neighbors.push(j);
                weights.push(w);
            }
            offsets.push(neighbors.len());
        }
        Self {
            positions,
            radii,
            offsets,
            neighbors,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// `(neighbour, weight)` pairs of vertex `i`, ascending by neighbour.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.offsets[i], self.offsets[i + 1]);
        self.neighbors[s..e]
            .iter()
            .zip(&self.weights[s..e])
            .map(|(&j, &w)| (j as usize, w))
    }
}

/// Moves every point along its predicted direction by its predicted radius:
/// `p' = p + exp(log_radius) · direction`. Returns positions and radii in
/// input order.
pub fn project_to_medial(cloud: &PointCloud, field: &MedialField) -> Result<(Vec<Point3>, Vec<f64>)> {
    if field.log_radius.len() != cloud.len() || field.direction.len() != cloud.len() {
        return Err(Error::invalid(format!(
            "medial field covers {} points, cloud has {}",
            field.log_radius.len(),
            cloud.len()
        )));
    }
    let radii: Vec<f64> = field.log_radius.iter().map(|lr| lr.exp()).collect();
    let positions = cloud
        .points()
        .iter()
        .zip(&field.direction)
        .zip(&radii)
        .map(|((&p, &d), &r)| p + d * r)
        .collect();
    Ok((positions, radii))
}

/// Connects `i` and `j` when their distance is strictly below the
/// admission radius given by `rule`. Edge weights are Euclidean distances.
///
/// Candidate pairs come from k-d tree radius queries; the admitted edge set
/// is exactly that of the all-pairs definition.
pub fn build_neighbor_graph(positions: &[Point3], radii: &[f64], rule: AdmissionRule) -> Result<NeighborGraph> {
    if positions.len() != radii.len() {
        return Err(Error::invalid(format!(
            "{} positions but {} radii",
            positions.len(),
            radii.len()
        )));
    }
    let tree = KdTree::new(positions);
    // Each vertex queries its own radius. Under `Min` the admitted set is
    // symmetric already; otherwise each direction is mirrored below.
    let rows: Vec<Vec<(u32, f64)>> = (0..positions.len())
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            tree.for_each_within(positions[i], radii[i], |j, d| {
                if j != i && (rule != AdmissionRule::Min || d < radii[j]) {
                    row.push((j as u32, d));
                }
            });
            row.sort_unstable_by_key(|e| e.0);
            row
        })
        .collect();

    let rows = match rule {
        AdmissionRule::Min => rows,
        AdmissionRule::Max | AdmissionRule::Source => {
            let mut sym = rows.clone();
            for (i, row) in rows.iter().enumerate() {
                for &(j, d) in row {
                    sym[j as usize].push((i as u32, d));
                }
            }
            sym.par_iter_mut().for_each(|row| {
                row.sort_unstable_by_key(|e| e.0);
                row.dedup_by_key(|e| e.0);
            });
            sym
        }
    };
    Ok(NeighborGraph::from_rows(positions.to_vec(), radii.to_vec(), rows))
}

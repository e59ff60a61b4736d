//! Medial projection, neighbourhood graph and greedy skeleton extraction.

mod components;
mod extract;
mod graph;
mod sssp;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use components::{connected_components, select_root, Components};
pub use extract::{extract_paths, ExtractParams};
pub use graph::{build_neighbor_graph, project_to_medial, AdmissionRule, NeighborGraph};
pub use sssp::{sssp, ShortestPaths};

use crate::error::{Error, Result};
use crate::estimate::{Estimator, MedialField};
use crate::model::{voxel_groups, PointCloud, Skeleton};

/// Tunables of [`skeletonize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkeletonizeConfig {
    /// Voxel side for the initial downsample; `None` skips it.
    pub voxel_size: Option<f64>,
    pub admission_rule: AdmissionRule,
    pub allocation_factor: f64,
    pub min_subgraph_points: usize,
    pub min_path_nodes: usize,
}

impl Default for SkeletonizeConfig {
    fn default() -> Self {
        Self {
            voxel_size: Some(0.01),
            admission_rule: AdmissionRule::Min,
            allocation_factor: 1.0,
            min_subgraph_points: 5,
            min_path_nodes: 2,
        }
    }
}

impl SkeletonizeConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.voxel_size {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("voxel size must be positive, got {v}")));
            }
        }
        if !(self.allocation_factor.is_finite() && self.allocation_factor > 0.0) {
            return Err(Error::invalid(format!(
                "allocation factor must be positive, got {}",
                self.allocation_factor
            )));
        }
        if self.min_subgraph_points < 1 {
            return Err(Error::invalid("min_subgraph_points must be at least 1"));
        }
        if self.min_path_nodes < 2 {
            return Err(Error::invalid("min_path_nodes must be at least 2"));
        }
        Ok(())
    }

    fn extract_params(&self) -> ExtractParams {
        ExtractParams {
            allocation_factor: self.allocation_factor,
            min_path_nodes: self.min_path_nodes,
        }
    }
}

/// Counts and wall-clock timings of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub input_points: usize,
    pub downsampled_points: usize,
    pub edges: usize,
    /// Retained components, one tree each.
    pub components: usize,
    pub residue_components: usize,
    pub residue_points: usize,
    pub nodes: usize,
    /// `(stage, elapsed)` in execution order.
    pub timings: Vec<(&'static str, Duration)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Skeletonization {
    pub skeleton: Skeleton,
    pub diagnostics: Diagnostics,
}

/// Runs the full pipeline: downsample, estimate, project, graph, then one
/// tree per retained component.
///
/// Trees are emitted in component order (largest first). Node ids are dense
/// from 0 and branch ids are unique across the forest.
pub fn skeletonize(cloud: &PointCloud, estimator: &Estimator, config: &SkeletonizeConfig) -> Result<Skeletonization> {
    config.validate()?;
    if cloud.is_empty() {
        return Err(Error::invalid("cannot skeletonize an empty cloud"));
    }
    cloud.check_finite()?;
    let mut diag = Diagnostics {
        input_points: cloud.len(),
        ..Diagnostics::default()
    };
    let mut clock = Instant::now();
    let mut lap = |diag: &mut Diagnostics, stage| {
        let now = Instant::now();
        diag.timings.push((stage, now - clock));
        clock = now;
    };

    let (points, field) = prepare(cloud, estimator, config.voxel_size)?;
    lap(&mut diag, "downsample+estimate");
    if points.is_empty() {
        return Err(Error::invalid("cloud is empty after downsampling"));
    }
    field.validate(points.len())?;
    diag.downsampled_points = points.len();

    let (positions, radii) = project_to_medial(&points, &field)?;
    let graph = build_neighbor_graph(&positions, &radii, config.admission_rule)?;
    diag.edges = graph.edge_count();
    lap(&mut diag, "graph");

    let comps = connected_components(&graph, config.min_subgraph_points);
    diag.components = comps.kept.len();
    diag.residue_components = comps.residue.len();
    diag.residue_points = comps.residue_points();

    let params = config.extract_params();
    let trees: Vec<Skeleton> = comps
        .kept
        .par_iter()
        .map(|comp| {
            let root = select_root(comp, graph.positions());
            let sp = sssp(&graph, comp, root)?;
            Ok(extract_paths(&graph, &sp, params))
        })
        .collect::<Result<_>>()?;
    lap(&mut diag, "extract");

    let skeleton = merge_forest(trees);
    diag.nodes = skeleton.nodes.len();
    Ok(Skeletonization {
        skeleton,
        diagnostics: diag,
    })
}

/// Downsamples and estimates. Provided fields refer to the raw cloud and are
/// averaged over the same voxel groups as the points.
fn prepare(cloud: &PointCloud, estimator: &Estimator, voxel: Option<f64>) -> Result<(PointCloud, MedialField)> {
    let Some(res) = voxel else {
        let field = estimator.estimate(cloud)?;
        return Ok((cloud.clone(), field));
    };
    match estimator {
        Estimator::Provided(field) => {
            field.validate(cloud.len())?;
            let groups: Vec<Vec<usize>> = voxel_groups(cloud, res)?.into_iter().map(|(_, g)| g).collect();
            let down = crate::model::voxel_downsample(cloud, res)?;
            Ok((down, field.aggregate(&groups)))
        }
        _ => {
            let down = crate::model::voxel_downsample(cloud, res)?;
            let field = estimator.estimate(&down)?;
            Ok((down, field))
        }
    }
}

fn merge_forest(trees: Vec<Skeleton>) -> Skeleton {
    let mut nodes = Vec::with_capacity(trees.iter().map(Skeleton::len).sum());
    let mut branch_base = 0u32;
    for tree in trees {
        let base = nodes.len();
        let mut branches = 0u32;
        for mut n in tree.nodes {
            n.id += base;
            n.parent = n.parent.map(|p| p + base);
            branches = branches.max(n.branch_id + 1);
            n.branch_id += branch_base;
            nodes.push(n);
        }
        branch_base += branches;
    }
    Skeleton::new(nodes)
}

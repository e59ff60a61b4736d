//! Skeleton JSON documents: a node list plus free-form provenance metadata.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{skeleton_validate, Skeleton, SkeletonNode, Vec3};

/// Where a skeleton came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SkeletonMeta {
    pub generator: String,
    pub seed: Option<u64>,
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: usize,
    parent: Option<usize>,
    position: [f64; 3],
    radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    branch_id: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Document {
    nodes: Vec<NodeRecord>,
    #[serde(default)]
    meta: SkeletonMeta,
}

/// Pretty-printed JSON with a trailing newline.
pub fn encode_skeleton(skeleton: &Skeleton, meta: &SkeletonMeta) -> Result<String> {
    let doc = Document {
        nodes: skeleton
            .nodes
            .iter()
            .map(|n| NodeRecord {
                id: n.id,
                parent: n.parent,
                position: n.position.to_array(),
                radius: n.radius,
                branch_id: Some(n.branch_id),
            })
            .collect(),
        meta: meta.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Json {
        path: ".".into(),
        message: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

/// Parses and validates a skeleton document. Nodes without `branch_id` get
/// structural branch ids, assigned only when every node lacks one.
pub fn parse_skeleton(text: &str) -> Result<(Skeleton, SkeletonMeta)> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| Error::Json {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let with_branch = doc.nodes.iter().filter(|n| n.branch_id.is_some()).count();
    if with_branch != 0 && with_branch != doc.nodes.len() {
        return Err(Error::InvalidSkeleton(
            "branch_id must be given for every node or for none".into(),
        ));
    }
    let mut skeleton = Skeleton::new(
        doc.nodes
            .iter()
            .map(|n| SkeletonNode {
                id: n.id,
                position: Vec3::new(n.position[0], n.position[1], n.position[2]),
                radius: n.radius,
                parent: n.parent,
                branch_id: n.branch_id.unwrap_or(0),
            })
            .collect(),
    );
    let violations = skeleton_validate(&skeleton);
    if let Some(first) = violations.first() {
        let more = match violations.len() {
            1 => String::new(),
            k => format!(" (and {} more)", k - 1),
        };
        return Err(Error::InvalidSkeleton(format!("{first}{more}")));
    }
    if with_branch == 0 {
        skeleton.assign_structural_branches();
    }
    Ok((skeleton, doc.meta))
}

pub fn read_skeleton(path: impl AsRef<Path>) -> Result<(Skeleton, SkeletonMeta)> {
    parse_skeleton(&std::fs::read_to_string(path)?)
}

pub fn write_skeleton(path: impl AsRef<Path>, skeleton: &Skeleton, meta: &SkeletonMeta) -> Result<()> {
    std::fs::write(path, encode_skeleton(skeleton, meta)?)?;
    Ok(())
}

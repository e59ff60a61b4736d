//! Tree point-cloud skeletonization.
//!
//! Surface points carry a *medial field*: a radius and a unit direction
//! pointing at the branch centreline. Projecting every point along that field
//! collapses the cloud onto the medial axis, where a radius-constrained
//! neighbourhood graph is built and a greedy shortest-path sweep extracts a
//! skeleton forest.
//!
//! The crate also contains a procedural generator for labelled synthetic
//! trees, two medial-field estimators (a ground-truth oracle and a label-free
//! geometric baseline) and the precision/recall/F1 evaluation harness.

// Negated comparisons such as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimate;
pub mod eval;
pub mod io;
pub mod model;
pub mod skeletonize;
pub mod spatial;
pub mod synth;

pub use error::{Error, Result};
pub use estimate::{Estimator, EstimatorReport, MedialField};
pub use eval::{EvalReport, SkeletonSamples};
pub use skeletonize::{skeletonize, AdmissionRule, NeighborGraph, Skeletonization, SkeletonizeConfig};

pub use model::{GroundTruthLabel, Point3, PointCloud, Skeleton, SkeletonNode, Vec3};

pub use synth::{AugmentParams, TreeParams};

//! Geometric domain types shared by every stage of the pipeline.

mod cloud;
mod skeleton;
mod vec3;
mod voxel;

pub use cloud::{GroundTruthLabel, PointCloud};
pub use skeleton::{skeleton_validate, Skeleton, SkeletonNode, Violation};
pub use vec3::{Point3, Vec3};
pub use voxel::{voxel_downsample, voxel_groups, VoxelKey};

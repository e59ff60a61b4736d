//! On-disk formats: PLY for clouds, JSON for skeletons.

mod ply;
mod skeleton_json;

pub use ply::{encode_cloud, parse_cloud, read_cloud, write_cloud, CloudFile, PlyFormat};
pub use skeleton_json::{encode_skeleton, parse_skeleton, read_skeleton, write_skeleton, SkeletonMeta};

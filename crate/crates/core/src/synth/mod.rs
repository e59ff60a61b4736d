//! Labelled synthetic trees: skeleton generation, surface sampling,
//! capture-style degradation and ground-truth pruning.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the caller's seed
//! and a fixed per-purpose stream id, so results are reproducible and do not
//! depend on thread scheduling.

mod augment;
mod params;
mod prune;
mod surface;
mod tree;

pub use augment::{augment, occlude, Sphere};
pub use params::{AugmentParams, TreeParams};
pub use prune::{prune_ground_truth, prune_skeleton};
pub use surface::sample_surface;
pub use tree::generate_skeleton;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids used to derive independent generators from one seed.
pub mod streams {
    pub const TREE: u64 = 1;
    pub const SURFACE: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const DROPOUT: u64 = 4;
    pub const OCCLUSION: u64 = 5;
}

/// The generator for `(seed, stream)`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

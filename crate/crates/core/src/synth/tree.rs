use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{Point3, Skeleton, SkeletonNode, Vec3};

use super::{params::TreeParams, rng_for, streams};

/// Fraction of a branch's base radius lost by its tip.
const TAPER: f64 = 0.5;
/// Per-segment direction wobble, radians.
const WOBBLE: f64 = 0.04;
/// Children attach between this fraction of the parent's nodes and its tip.
const ATTACH_FROM: f64 = 0.3;
const GOLDEN_ANGLE: f64 = PI * (3.0 - 2.236_067_977_499_79);

/// Grows a single-root skeleton from `params`.
///
/// The trunk rises along +z from the origin. Each branch is a polyline whose
/// segments are no longer than `trunk_radius` and whose radius tapers
/// linearly towards the tip; children start at a node of their parent with
/// a radius of `radius_decay` times the radius there. Nodes of one branch
/// share a `branch_id`, numbered in depth-first order.
pub fn generate_skeleton(params: &TreeParams) -> Result<Skeleton> {
    params.validate()?;
    let mut g = Grower {
        params,
        rng: rng_for(params.seed, streams::TREE),
        nodes: Vec::new(),
        next_branch: 0,
    };
    g.grow(None, Vec3::ZERO, Vec3::Z, params.trunk_length, params.trunk_radius, 0);
    Ok(Skeleton::new(g.nodes))
}

struct Grower<'a> {
    params: &'a TreeParams,
    rng: ChaCha8Rng,
    nodes: Vec<SkeletonNode>,
    next_branch: u32,
}

impl Grower<'_> {
    fn push(&mut self, position: Point3, radius: f64, parent: Option<usize>, branch_id: u32) -> usize {
        let id = self.nodes.len();
        self.nodes.push(SkeletonNode {
            id,
            position,
            radius,
            parent,
            branch_id,
        });
        id
    }

    fn grow(
        &mut self,
        attach: Option<usize>,
        start: Point3,
        direction: Vec3,
        length: f64,
        base_radius: f64,
        generation: u32,
    ) {
        let branch_id = self.next_branch;
        self.next_branch += 1;

        let segments = ((length / self.params.trunk_radius).ceil() as usize).max(2);
        let step = length / segments as f64;

        // Nodes of this branch paired with the direction of the segment
        // leading into them.
        let mut own: Vec<(usize, Vec3)> = Vec::with_capacity(segments + 1);
        let mut prev = match attach {
            Some(a) => a,
            None => {
                let root = self.push(start, base_radius, None, branch_id);
                own.push((root, direction));
                root
            }
        };
        let mut pos = start;
        let mut dir = direction;
        for k in 1..=segments {
            let azimuth = self.rng.random_range(0.0..TAU);
            let wobble = self.rng.random_range(0.0..WOBBLE);
            dir = tilt(dir, wobble, azimuth);
            pos += dir * step;
            let radius = base_radius * (1.0 - TAPER * k as f64 / segments as f64);
            prev = self.push(pos, radius, Some(prev), branch_id);
            own.push((prev, dir));
        }

        if generation >= self.params.depth {
            return;
        }
        let (c0, c1) = self.params.children_range;
        let count = self.rng.random_range(c0..=c1);
        let (a0, a1) = self.params.branch_angle_range;
        let phase = self.rng.random_range(0.0..TAU);
        // Never attach at the tip itself.
        let first = ((own.len() as f64 * ATTACH_FROM).floor() as usize).min(own.len() - 2);
        for c in 0..count {
            let slot = self.rng.random_range(first..own.len() - 1);
            let (node, local_dir) = own[slot];
            let angle = if a1 > a0 { self.rng.random_range(a0..=a1) } else { a0 };
            let azimuth = phase + c as f64 * GOLDEN_ANGLE + self.rng.random_range(-0.3..0.3);
            let scale = self.rng.random_range(0.85..=1.0);
            let child_dir = tilt(local_dir, angle, azimuth);
            let at = self.nodes[node].position;
            let radius = self.nodes[node].radius * self.params.radius_decay;
            let child_length = length * self.params.length_decay * scale;
            self.grow(Some(node), at, child_dir, child_length, radius, generation + 1);
        }
    }
}

/// Rotates unit vector `d` away from itself by `angle`, towards the
/// perpendicular direction selected by `azimuth`.
fn tilt(d: Vec3, angle: f64, azimuth: f64) -> Vec3 {
    let u = d.any_orthonormal();
    let v = d.cross(u);
    let side = u * azimuth.cos() + v * azimuth.sin();
    (d * angle.cos() + side * angle.sin()).try_normalize().unwrap_or(d)
}

use rayon::prelude::*;

use super::shoot::{shoot, BranchPoint};
use crate::dae::SystemDef;
use crate::error::{Error, Result};

/// Orbits closer than this in sampled sup-distance are the same solution.
pub const ORBIT_DEDUPE: f64 = 1e-4;

/// Shoot from every point of a grid over the x-projection of the box and
/// keep the distinct periodic solutions, in grid order.
pub fn multiplicity_scan(sys: &SystemDef, lambda: f64, grid_per_dim: usize) -> Result<Vec<BranchPoint>> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Precondition(format!("lambda must be nonnegative, got {lambda}")));
    }
    let k = sys.k();
    let region = sys.region();
    let x_box = region.project(0..k);
    let y_box = region.project(k..sys.n());
    let q_guess = y_box.at(&vec![0.5; sys.s()]);
    let found: Vec<Option<BranchPoint>> = x_box
        .grid(grid_per_dim)
        .par_iter()
        .map(|p| shoot(sys, lambda, p, &q_guess).ok())
        .collect();
    let mut distinct: Vec<BranchPoint> = Vec::new();
    for bp in found.into_iter().flatten() {
        if distinct.iter().all(|d| d.orbit.sup_distance(&bp.orbit) > ORBIT_DEDUPE) {
            distinct.push(bp);
        }
    }
    Ok(distinct)
}

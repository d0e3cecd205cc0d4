//! Degree computations that do not rely on classifying individual zeros.
//!
//! In one and two dimensions the degree is read off the boundary (endpoint
//! signs, winding number). In higher dimensions the field is perturbed by a
//! small constant so that its zeros become regular, and several independent
//! perturbations vote.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::zeros::{degree_sum, find_zeros};
use crate::error::{Error, Result};
use crate::field::{Shifted, VectorField};
use crate::linalg::Vector;
use crate::region::Region;

const BOUNDARY_FLOOR: f64 = 1e-8;
const MAX_DEPTH: u32 = 48;
const VOTES: usize = 3;
const PERTURBATION: f64 = 1e-5;
/// Initial samples per box edge for the winding number.
const EDGE_SEGMENTS: usize = 64;
/// Largest field rotation accepted across one boundary segment.
const MAX_SEGMENT_TURN: f64 = std::f64::consts::FRAC_PI_4;

/// Smallest `|F|` over a sampled boundary, with its location.
pub fn boundary_margin(field: &dyn VectorField, region: &Region, per_dim: usize) -> Result<(f64, Vec<f64>)> {
    let mut best = (f64::INFINITY, Vec::new());
    for z in region.boundary_samples(per_dim) {
        let norm = field.eval(&z)?.norm();
        if norm < best.0 {
            best = (norm, z);
        }
    }
    Ok(best)
}

fn check_margin(margin: &(f64, Vec<f64>)) -> Result<()> {
    if margin.0 <= BOUNDARY_FLOOR {
        return Err(Error::BoundaryZero {
            point: margin.1.clone(),
            norm: margin.0,
        });
    }
    Ok(())
}

/// Degree on an interval from the endpoint signs.
pub fn interval_degree(field: &dyn VectorField, region: &Region) -> Result<i64> {
    let a = field.eval(region.lower())?[0];
    let b = field.eval(region.upper())?[0];
    for (v, at) in [(a, region.lower()), (b, region.upper())] {
        if v.abs() <= BOUNDARY_FLOOR {
            return Err(Error::BoundaryZero {
                point: at.to_vec(),
                norm: v.abs(),
            });
        }
    }
    Ok(((b.signum() - a.signum()) / 2.0) as i64)
}

/// Signed angle from `a` to `b` in `(-π, π]`.
fn angle(a: &Vector, b: &Vector) -> f64 {
    (a[0] * b[1] - a[1] * b[0]).atan2(a.dot(b))
}

/// Winding number of a planar field along the counterclockwise boundary of
/// the box. Each edge starts from [`EDGE_SEGMENTS`] samples; a segment is
/// bisected until the field turns by less than [`MAX_SEGMENT_TURN`] across it
/// and its midpoint agrees with that turn, so fast rotations between samples
/// are not aliased away.
pub fn winding_number(field: &dyn VectorField, region: &Region) -> Result<i64> {
    if region.dim() != 2 {
        return Err(Error::Precondition(format!(
            "winding number needs a planar box, got dimension {}",
            region.dim()
        )));
    }
    let (lo, hi) = (region.lower(), region.upper());
    let corners = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
    let mut total = 0.0;
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        let at = |j: usize| {
            let s = j as f64 / EDGE_SEGMENTS as f64;
            [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
        };
        let mut prev = (at(0), eval_checked(field, &at(0))?);
        for j in 1..=EDGE_SEGMENTS {
            let next = (at(j), eval_checked(field, &at(j))?);
            total += edge_angle(field, prev.0, next.0, &prev.1, &next.1, 0)?;
            prev = next;
        }
    }
    let turns = total / std::f64::consts::TAU;
    if (turns - turns.round()).abs() > 1e-6 {
        return Err(Error::Precondition(format!(
            "boundary walk did not close ({turns} turns)"
        )));
    }
    Ok(turns.round() as i64)
}

fn eval_checked(field: &dyn VectorField, z: &[f64]) -> Result<Vector> {
    let v = field.eval(z)?;
    if v.norm() <= BOUNDARY_FLOOR {
        return Err(Error::BoundaryZero {
            point: z.to_vec(),
            norm: v.norm(),
        });
    }
    Ok(v)
}

fn edge_angle(field: &dyn VectorField, a: [f64; 2], b: [f64; 2], fa: &Vector, fb: &Vector, depth: u32) -> Result<f64> {
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let fm = eval_checked(field, &mid)?;
    let whole = angle(fa, fb);
    let (first, second) = (angle(fa, &fm), angle(&fm, fb));
    if whole.abs() <= MAX_SEGMENT_TURN && (first + second - whole).abs() <= 1e-9 {
        return Ok(whole);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::BoundaryZero {
            point: mid.to_vec(),
            norm: fm.norm(),
        });
    }
    Ok(edge_angle(field, a, mid, fa, &fm, depth + 1)? + edge_angle(field, mid, b, &fm, fb, depth + 1)?)
}

/// Degree by perturbation and majority vote: `F + c` with a small random
/// constant `c` in the leading (`f`) components, on a slightly inflated box.
pub fn perturb_vote(
    field: &dyn VectorField,
    region: &Region,
    grid_per_dim: usize,
    boundary_per_dim: usize,
    seed: u64,
) -> Result<i64> {
    let margin = boundary_margin(field, region, boundary_per_dim)?;
    check_margin(&margin)?;
    let radius = PERTURBATION.min(0.5 * margin.0);
    let n = field.dim();
    let shifted_dims = field.block_split().unwrap_or(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut votes: Vec<Option<i64>> = Vec::with_capacity(VOTES);
    for _ in 0..VOTES {
        let mut c: Vec<f64> = (0..shifted_dims).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        c.iter_mut().for_each(|v| *v *= radius / norm);
        let inflate: Vec<f64> = (0..n).map(|i| region.width(i) * rng.random_range(0.0..1e-6)).collect();
        let shifted = Shifted { inner: field, shift: c };
        let bigger = region.inflate(&inflate);
        let vote = find_zeros(&shifted, &bigger, grid_per_dim)
            .and_then(|set| degree_sum(&set.zeros, &bigger))
            .ok();
        votes.push(vote);
    }
    for v in votes.iter().flatten() {
        if votes.iter().filter(|w| **w == Some(*v)).count() * 2 > VOTES {
            return Ok(*v);
        }
    }
    Err(Error::InconsistentVote { votes })
}

/// Boundary-based degree: endpoint signs, winding number, or perturbation
/// vote depending on the dimension.
pub fn degree_boundary_oracle(
    field: &dyn VectorField,
    region: &Region,
    grid_per_dim: usize,
    boundary_per_dim: usize,
    seed: u64,
) -> Result<i64> {
    match region.dim() {
        1 => interval_degree(field, region),
        2 => {
            check_margin(&boundary_margin(field, region, boundary_per_dim)?)?;
            winding_number(field, region)
        }
        _ => perturb_vote(field, region, grid_per_dim, boundary_per_dim, seed),
    }
}

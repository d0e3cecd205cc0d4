//! Multistart Newton search for the zeros of a vector field in a box.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::linalg::{block_schur_det, det_sign, serialize_rows, Lu, Matrix};
use crate::region::Region;

const NEWTON_MAX_ITER: usize = 200;
const ACCEPT_RESIDUAL: f64 = 1e-10;
const DEDUPE_RADIUS: f64 = 1e-6;
const DEGENERATE_TOL: f64 = 1e-8;
const BOUNDARY_GAP: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct ZeroRecord {
    pub point: Vec<f64>,
    pub residual: f64,
    #[serde(serialize_with = "serialize_rows")]
    pub jacobian: Matrix,
    pub det: f64,
    /// Sign of the Jacobian determinant; `None` when degenerate.
    pub index: Option<i8>,
    pub degenerate: bool,
    /// `(sign det ∂₂g, sign det S)` for fields with a DAE block structure.
    pub schur_sign_pair: Option<(i8, i8)>,
}

impl ZeroRecord {
    /// Build the record for a point already known to be a zero.
    pub fn at(field: &dyn VectorField, point: Vec<f64>) -> Result<Self> {
        let residual = field.eval(&point)?.norm();
        let jacobian = field.jacobian(&point)?;
        let ds = det_sign(&jacobian, DEGENERATE_TOL);
        let degenerate = ds.sign == 0;
        let schur_sign_pair = field.block_split().and_then(|k| {
            let (d, s) = block_schur_det(&jacobian, k).ok()?;
            let s_sign = if degenerate { 0 } else { sign_of(s) };
            Some((sign_of(d), s_sign))
        });
        Ok(Self {
            point,
            residual,
            jacobian,
            det: ds.det,
            index: (!degenerate).then_some(ds.sign),
            degenerate,
            schur_sign_pair,
        })
    }
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroSet {
    pub zeros: Vec<ZeroRecord>,
    /// Set when a converged point lies within `1e-6` of the box boundary.
    pub near_boundary: bool,
}

/// Multistart Newton from a `grid_per_dim^n` grid; converged points inside
/// `region` are merged in grid order.
pub fn find_zeros(field: &dyn VectorField, region: &Region, grid_per_dim: usize) -> Result<ZeroSet> {
    if grid_per_dim < 2 {
        return Err(Error::Precondition(format!(
            "grid needs at least 2 points per dimension, got {grid_per_dim}"
        )));
    }
    let starts = region.grid(grid_per_dim);
    let hits: Vec<Option<(Vec<f64>, f64)>> = starts.par_iter().map(|z0| newton(field, region, z0)).collect();

    let mut found: Vec<(Vec<f64>, f64)> = Vec::new();
    for (z, res) in hits.into_iter().flatten() {
        match found.iter_mut().find(|(w, _)| distance(w, &z) <= DEDUPE_RADIUS) {
            Some(slot) if res < slot.1 => *slot = (z, res),
            Some(_) => {}
            None => found.push((z, res)),
        }
    }
    let near_boundary = found.iter().any(|(z, _)| region.distance_to_boundary(z) < BOUNDARY_GAP);
    let zeros = found
        .into_iter()
        .map(|(z, _)| ZeroRecord::at(field, z))
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroSet { zeros, near_boundary })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

/// Undamped Newton run to stagnation, so that linearly convergent
/// (degenerate) zeros are also located accurately.
fn newton(field: &dyn VectorField, region: &Region, z0: &[f64]) -> Option<(Vec<f64>, f64)> {
    let slack: Vec<f64> = (0..region.dim()).map(|i| region.width(i)).collect();
    let outer = region.inflate(&slack);
    let mut z = z0.to_vec();
    let mut r = field.eval(&z).ok()?;
    for _ in 0..NEWTON_MAX_ITER {
        if r.norm() == 0.0 {
            break;
        }
        let jac = field.jacobian(&z).ok()?;
        let Ok(lu) = Lu::factor_exact(&jac) else {
            break;
        };
        let step = lu.solve(&r);
        if !step.iter().all(|v| v.is_finite()) {
            break;
        }
        let znorm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (zi, d) in z.iter_mut().zip(step.iter()) {
            *zi -= d;
        }
        if !outer.contains(&z) {
            return None;
        }
        r = field.eval(&z).ok()?;
        if step.norm() <= 1e-15 * (1.0 + znorm) {
            break;
        }
    }
    let res = r.norm();
    (res <= ACCEPT_RESIDUAL && region.contains(&z)).then_some((z, res))
}

/// Signed count of the zeros; refuses degenerate or boundary zeros.
pub fn degree_sum(zeros: &[ZeroRecord], region: &Region) -> Result<i64> {
    if let Some(z) = zeros
        .iter()
        .find(|z| region.distance_to_boundary(&z.point) < BOUNDARY_GAP)
    {
        return Err(Error::BoundaryZero {
            point: z.point.clone(),
            norm: z.residual,
        });
    }
    let degenerate: Vec<Vec<f64>> = zeros.iter().filter(|z| z.degenerate).map(|z| z.point.clone()).collect();
    if !degenerate.is_empty() {
        return Err(Error::DegenerateZeros { points: degenerate });
    }
    Ok(zeros.iter().map(|z| i64::from(z.index.unwrap_or(0))).sum())
}

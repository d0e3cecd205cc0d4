//! Zeros of `F = (f, g)`, the Brouwer degree of `F` on a box, and the degree
//! of the tangent field Ψ on the constraint manifold.
//!
//! When `∂₂g` has constant sign 𝔰 on the box, `deg(Ψ) = 𝔰 · deg(F)`. Locally,
//! the index of Ψ at a zero is the sign of `det A` with
//! `A = ∂₁f - ∂₂f [∂₂g]⁻¹ ∂₁g`, and `det J = det ∂₂g · det A`.

mod methods;
mod oracle;
mod zeros;

use serde::Serialize;

pub use methods::{Auto, BoundaryOracle, DegreeMethod, DegreeMethods, PerturbVote, Winding, ZeroSum};
pub use oracle::{boundary_margin, degree_boundary_oracle, interval_degree, perturb_vote, winding_number};
pub use zeros::{degree_sum, find_zeros, ZeroRecord, ZeroSet};

use crate::dae::{SystemDef, ValidationReport};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::field::{ad_jacobian, FnField};
use crate::linalg::{det_sign, Matrix, Vector};
use crate::region::Region;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeOptions {
    /// Multistart grid points per dimension.
    pub grid: usize,
    /// Boundary sampling density per face dimension.
    pub boundary_per_dim: usize,
    /// Seed for the perturbation vote.
    pub seed: u64,
    /// Samples for the `∂₂g` sign check.
    pub samples: usize,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        Self {
            grid: 16,
            boundary_per_dim: 33,
            seed: 0,
            samples: 1024,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    #[serde(rename = "box")]
    pub region: Region,
    pub zeros: Vec<ZeroRecord>,
    pub near_boundary: bool,
    pub method: String,
    pub deg_f: i64,
    pub sign_d2g: i8,
    pub deg_psi: i64,
    /// Independent boundary degree, computed for planar systems.
    pub oracle_deg: Option<i64>,
    /// `Σ chart_index` when every zero is nondegenerate.
    pub chart_index_sum: Option<i64>,
    pub boundary_margin: f64,
    pub validation: ValidationReport,
}

/// Degree of Ψ on the constraint manifold inside the system's box.
pub fn deg_psi(sys: &SystemDef, method: &dyn DegreeMethod, opts: &DegreeOptions) -> Result<DegreeReport> {
    let validation = sys.validate(opts.samples)?;
    let region = sys.region();
    let set = find_zeros(sys, region, opts.grid)?;
    let (margin, at) = boundary_margin(sys, region, opts.boundary_per_dim)?;
    if margin <= 1e-8 {
        return Err(Error::BoundaryZero {
            point: at,
            norm: margin,
        });
    }
    let deg_f = method.degree(sys, region, opts)?;
    let oracle_deg = if sys.n() <= 2 {
        Some(degree_boundary_oracle(
            sys,
            region,
            opts.grid,
            opts.boundary_per_dim,
            opts.seed,
        )?)
    } else {
        None
    };
    let chart_index_sum = if set.zeros.iter().all(|z| !z.degenerate) {
        let mut sum = 0;
        for z in &set.zeros {
            sum += i64::from(chart_index(sys, z)?);
        }
        Some(sum)
    } else {
        None
    };
    Ok(DegreeReport {
        region: region.clone(),
        zeros: set.zeros,
        near_boundary: set.near_boundary,
        method: method.name().to_string(),
        deg_f,
        sign_d2g: validation.sign,
        deg_psi: i64::from(validation.sign) * deg_f,
        oracle_deg,
        chart_index_sum,
        boundary_margin: margin,
        validation,
    })
}

/// Index of Ψ at a nondegenerate zero: `sign det A`.
pub fn chart_index(sys: &SystemDef, z: &ZeroRecord) -> Result<i8> {
    let a = sys.reduced_linearization(&z.point)?;
    match det_sign(&a, 1e-8).sign {
        0 => Err(Error::Precondition(format!(
            "zero at {:?} is degenerate; its chart index is undefined",
            z.point
        ))),
        s => Ok(s),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairDegreeReport {
    /// `deg(ω(·, 0))` on the slice `{q = 0}`.
    pub slice_degree: i64,
    /// `(-1)^k · slice_degree`, the degree of `v(p, q) = (q, ω(p, q))`.
    pub degree: i64,
    /// Degree of `v` computed directly on the full box, when planar.
    pub direct: Option<i64>,
}

/// Degree of `v(p, q) = (q, ω(p, q))` through the slice map `p ↦ ω(p, 0)`.
///
/// `omega` holds `k` formulas over `2k` variables `(p, q)`. Since
/// `det [[0, I], [∂₁ω, ∂₂ω]] = (-1)^k det ∂₁ω`, the degree of `v` is
/// `(-1)^k deg(ω(·, 0))`; for `k = 1` this is `-deg(ω(·, 0))`.
pub fn pair_degree(
    omega: &[Expression],
    region: &Region,
    method: &dyn DegreeMethod,
    opts: &DegreeOptions,
) -> Result<PairDegreeReport> {
    let k = omega.len();
    if k == 0 || omega.iter().any(|e| e.vars().len() != 2 * k) || region.dim() != 2 * k {
        return Err(Error::InvalidSystem(format!(
            "ω must have k formulas over 2k variables and a 2k-dimensional box (k = {k})"
        )));
    }
    if (k..2 * k).any(|i| !(region.lower()[i] < 0.0 && region.upper()[i] > 0.0)) {
        return Err(Error::Precondition(
            "the box must contain the slice q = 0 in its interior".into(),
        ));
    }
    let at_slice = |p: &[f64]| -> Vec<f64> { p.iter().copied().chain(std::iter::repeat_n(0.0, k)).collect() };
    let slice = FnField {
        dim: k,
        eval: |p: &[f64]| eval_all(omega, &at_slice(p)),
        jacobian: |p: &[f64]| ad_jacobian(omega, &at_slice(p), 0, k),
    };
    let slice_degree = method.degree(&slice, &region.project(0..k), opts)?;
    let degree = if k.is_multiple_of(2) {
        slice_degree
    } else {
        -slice_degree
    };

    let direct = if k == 1 {
        let full = FnField {
            dim: 2 * k,
            eval: |z: &[f64]| {
                let w = eval_all(omega, z)?;
                Ok(Vector::from_iterator(
                    2 * k,
                    z[k..].iter().copied().chain(w.iter().copied()),
                ))
            },
            jacobian: |z: &[f64]| {
                let dw = ad_jacobian(omega, z, 0, 2 * k)?;
                let mut j = Matrix::zeros(2 * k, 2 * k);
                for i in 0..k {
                    j[(i, k + i)] = 1.0;
                }
                j.rows_mut(k, k).copy_from(&dw);
                Ok(j)
            },
        };
        let d = degree_boundary_oracle(&full, region, opts.grid, opts.boundary_per_dim, opts.seed)?;
        if d != degree {
            return Err(Error::DegreeMismatch {
                direct: d,
                reduced: degree,
            });
        }
        Some(d)
    } else {
        None
    };
    Ok(PairDegreeReport {
        slice_degree,
        degree,
        direct,
    })
}

fn eval_all(exprs: &[Expression], z: &[f64]) -> Result<Vector> {
    let vals = exprs.iter().map(|e| e.eval(z)).collect::<Result<Vec<_>, _>>()?;
    Ok(Vector::from_vec(vals))
}

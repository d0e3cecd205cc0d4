//! Sample-based check that `det ∂₂g` keeps one sign on the working box.

use crate::dae::{SystemDef, ValidationReport};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::field::ad_jacobian;
use crate::linalg::{Lu, Matrix, Vector};

const DET_FLOOR: f64 = 1e-10;
const REFINE_STARTS: usize = 8;

pub(crate) fn validate(sys: &SystemDef, samples: usize) -> Result<ValidationReport> {
    let det = sys.d2g_det();
    let region = sys.region();
    let points = region.halton(samples.max(1));
    let mut values = Vec::with_capacity(points.len());
    for z in &points {
        values.push(det.eval(&with_time(z))?);
    }

    let (imin, min_abs) = values
        .iter()
        .map(|v| v.abs())
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one sample");
    if min_abs < DET_FLOOR {
        let witness = polish_witness(sys, &points[imin]);
        return Err(violation(sys, witness, "determinant vanishes at a sample point"));
    }

    let sign = values[imin].signum();
    if let Some(opposite) = nearest_opposite(&points, &values, imin) {
        let root = bisect(det, &points[imin], &points[opposite])?;
        let witness = polish_witness(sys, &root);
        return Err(violation(sys, witness, "determinant changes sign inside the box"));
    }

    // Same sign everywhere on the samples: look for a touching zero between them.
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()));
    for &start in order.iter().take(REFINE_STARTS) {
        if let Some(z) = newton_min_norm(std::slice::from_ref(det), &[], &points[start], sys) {
            let witness = polish_witness(sys, &z);
            return Err(violation(sys, witness, "determinant vanishes between samples"));
        }
    }

    Ok(ValidationReport {
        samples: points.len(),
        min_abs_det: min_abs,
        min_location: points[imin].clone(),
        sign: sign as i8,
    })
}

fn with_time(z: &[f64]) -> Vec<f64> {
    std::iter::once(0.0).chain(z.iter().copied()).collect()
}

fn violation(sys: &SystemDef, witness: Vec<f64>, reason: &str) -> Error {
    let det = sys.d2g_det().eval(&with_time(&witness)).unwrap_or(f64::NAN);
    Error::HypothesisViolation {
        witness,
        det,
        reason: reason.to_string(),
    }
}

fn nearest_opposite(points: &[Vec<f64>], values: &[f64], from: usize) -> Option<usize> {
    let s = values[from].signum();
    let dist = |i: usize| -> f64 {
        points[i]
            .iter()
            .zip(&points[from])
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };
    (0..values.len())
        .filter(|&i| values[i].signum() != s)
        .min_by(|&a, &b| dist(a).total_cmp(&dist(b)))
}

fn bisect(det: &Expression, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let at = |t: f64| -> Vec<f64> { a.iter().zip(b).map(|(u, v)| u + t * (v - u)).collect() };
    let (mut lo, mut hi) = (0.0, 1.0);
    let s_lo = det.eval(&with_time(a))?.signum();
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if det.eval(&with_time(&at(mid)))?.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(0.5 * (lo + hi)))
}

/// Move a witness onto `{g = 0, det ∂₂g = 0}` when that set is reachable
/// from it; otherwise keep it where it is.
fn polish_witness(sys: &SystemDef, z: &[f64]) -> Vec<f64> {
    newton_min_norm(&[sys.d2g_det().clone()], sys.g(), z, sys).unwrap_or_else(|| z.to_vec())
}

/// Minimum-norm Newton iteration on the underdetermined system `exprs = 0`.
/// Returns a point inside the box where every residual is tiny.
fn newton_min_norm(first: &[Expression], rest: &[Expression], start: &[f64], sys: &SystemDef) -> Option<Vec<f64>> {
    let exprs: Vec<Expression> = first.iter().chain(rest).cloned().collect();
    let n = start.len();
    if exprs.len() > n {
        return None;
    }
    let region = sys.region();
    let mut z = start.to_vec();
    for _ in 0..200 {
        let vals = with_time(&z);
        let r = Vector::from_vec(
            exprs
                .iter()
                .map(|e| e.eval(&vals))
                .collect::<Result<Vec<_>, _>>()
                .ok()?,
        );
        if r[0].abs() < 1e-13 && r.rows(1, r.len() - 1).norm() < 1e-12 {
            return region.contains(&z).then_some(z);
        }
        let jac: Matrix = ad_jacobian(&exprs, &vals, 1, n).ok()?;
        let jjt = &jac * jac.transpose();
        let w = Lu::factor_exact(&jjt).ok()?.solve(&r);
        let step = jac.transpose() * w;
        for (zi, d) in z.iter_mut().zip(step.iter()) {
            *zi -= d;
        }
        if !region.contains(&z) || z.iter().any(|v| !v.is_finite()) {
            return None;
        }
        if step.norm() < 1e-15 {
            break;
        }
    }
    let vals = with_time(&z);
    let ok = exprs.iter().enumerate().all(|(i, e)| {
        e.eval(&vals)
            .map(|v| v.abs() < if i == 0 { DET_FLOOR } else { 1e-8 })
            .unwrap_or(false)
    });
    ok.then_some(z)
}

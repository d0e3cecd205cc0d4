use serde::Serialize;

use super::resonance::unit_multiplier;
use crate::dae::SystemDef;
use crate::error::{Error, Result};
use crate::flow::{inverse_time_t_map, time_t_map_with, FlowResult, Trajectory};
use crate::linalg::{Lu, Matrix, Vector};

pub const SHOOT_TOL: f64 = 1e-8;
const SHOOT_MAX_ITER: usize = 30;

/// A T-periodic solution of the λ-perturbed system.
#[derive(Clone, Debug, Serialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub p0: Vec<f64>,
    pub q0: Vec<f64>,
    pub sup_norm: f64,
    pub shooting_residual: f64,
    #[serde(skip)]
    pub orbit: Trajectory,
}

/// One evaluation of the shooting residual `P_λ(p) - p`.
pub(crate) struct Shot {
    pub flow: FlowResult,
    pub orbit: Trajectory,
    pub residual: Vector,
}

pub(crate) fn shot(sys: &SystemDef, lambda: f64, p: &[f64], q: &[f64]) -> Result<Shot> {
    let (flow, orbit) = time_t_map_with(sys, lambda, p, q, sys.tol.steps, true)?;
    let residual = Vector::from_iterator(p.len(), flow.end.p.iter().zip(p).map(|(a, b)| a - b));
    Ok(Shot {
        flow,
        orbit: orbit.expect("orbit requested"),
        residual,
    })
}

impl Shot {
    pub(crate) fn into_point(self, lambda: f64) -> BranchPoint {
        let start = self.orbit.first().clone();
        BranchPoint {
            lambda,
            p0: start.p,
            q0: start.q,
            sup_norm: self.orbit.sup_norm(),
            shooting_residual: self.residual.norm(),
            orbit: self.orbit,
        }
    }

    /// `dP - I`.
    pub(crate) fn jacobian(&self) -> Matrix {
        let k = self.residual.len();
        &self.flow.sensitivity - Matrix::identity(k, k)
    }
}

/// Newton's method on `P_λ(p0) = p0`. A singular `dP - I` at any iterate,
/// including the solution itself, is reported as an error: the solution would
/// not be isolated. When the forward iteration cannot proceed (the orbit
/// leaves the box or Newton stalls), the fixed point is sought backwards in
/// time and then confirmed forwards; the forward error is kept if that fails.
pub fn shoot(sys: &SystemDef, lambda: f64, p_guess: &[f64], q_guess: &[f64]) -> Result<BranchPoint> {
    match shoot_forward(sys, lambda, p_guess, q_guess) {
        Err(e @ (Error::LeftBox { .. } | Error::NoConvergence { .. } | Error::Overflow)) => {
            shoot_reverse(sys, lambda, p_guess, q_guess)
                .and_then(|p| shoot_forward(sys, lambda, &p, q_guess))
                .map_err(|_| e)
        }
        other => other,
    }
}

fn shoot_forward(sys: &SystemDef, lambda: f64, p_guess: &[f64], q_guess: &[f64]) -> Result<BranchPoint> {
    let mut p = p_guess.to_vec();
    let mut q = q_guess.to_vec();
    for iteration in 0..=SHOOT_MAX_ITER {
        let s = shot(sys, lambda, &p, &q)?;
        if unit_multiplier(&s.flow.sensitivity) {
            return Err(Error::SingularShooting { point: p, lambda });
        }
        if s.residual.norm() <= SHOOT_TOL {
            return Ok(s.into_point(lambda));
        }
        if iteration == SHOOT_MAX_ITER {
            return Err(Error::NoConvergence {
                what: "shooting",
                iterations: iteration,
                residual: s.residual.norm(),
                point: p,
            });
        }
        let lu = Lu::factor(&s.jacobian()).map_err(|_| Error::SingularShooting {
            point: p.clone(),
            lambda,
        })?;
        let step = lu.solve(&s.residual);
        q = s.orbit.first().q.clone();
        for (pi, d) in p.iter_mut().zip(step.iter()) {
            *pi -= d;
        }
    }
    unreachable!("the last iteration returns")
}

/// Newton's method on `P_λ⁻¹(p) = p`, integrating backwards in time. Orbits
/// that repel forwards attract backwards, so this reaches periodic solutions
/// whose forward shooting basin is too thin for a coarse start grid.
fn shoot_reverse(sys: &SystemDef, lambda: f64, p_guess: &[f64], q_guess: &[f64]) -> Result<Vec<f64>> {
    let mut p = p_guess.to_vec();
    let mut q = q_guess.to_vec();
    let k = p.len();
    for _ in 0..SHOOT_MAX_ITER {
        let flow = inverse_time_t_map(sys, lambda, &p, &q, sys.tol.steps)?;
        let r = Vector::from_iterator(k, flow.end.p.iter().zip(&p).map(|(a, b)| a - b));
        if r.norm() <= SHOOT_TOL {
            return Ok(p);
        }
        let jac = &flow.sensitivity - Matrix::identity(k, k);
        let lu = Lu::factor(&jac).map_err(|_| Error::SingularShooting {
            point: p.clone(),
            lambda,
        })?;
        let step = lu.solve(&r);
        q = sys.project(&p, &q)?.q;
        for (pi, d) in p.iter_mut().zip(step.iter()) {
            *pi -= d;
        }
    }
    Err(Error::NoConvergence {
        what: "reverse shooting",
        iterations: SHOOT_MAX_ITER,
        residual: f64::NAN,
        point: p,
    })
}

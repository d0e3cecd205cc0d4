//! Pseudo-arclength continuation of periodic solutions in `(λ, p0)`.

use serde::Serialize;

use super::resonance::{classify_resonance, Resonance};
use super::shoot::{shoot, shot, BranchPoint, Shot, SHOOT_TOL};
use crate::dae::SystemDef;
use crate::degree::ZeroRecord;
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    ReachedLambdaMax,
    LeftBox,
    ExceededNormBound,
    SingularShooting,
    MaxSteps,
    /// The branch turned back and crossed `λ = 0`.
    ReturnedToTrivial,
    /// The corrector kept failing down to the minimum step length.
    StepTooSmall,
}

#[derive(Clone, Debug, Serialize)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub origin: ZeroRecord,
    pub termination: Termination,
    /// Arclength step used to reach each point (0 for the origin).
    pub steps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuationOptions {
    pub lambda_max: f64,
    pub norm_bound: f64,
    pub max_steps: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            lambda_max: 1.0,
            norm_bound: f64::INFINITY,
            max_steps: 500,
            initial_step: 0.01,
            min_step: 1e-4,
            max_step: 0.1,
        }
    }
}

const CORRECTOR_MAX_ITER: usize = 8;
const EASY_ITER: usize = 3;
const EASY_STREAK: usize = 3;

struct Corrected {
    u: Vector,
    shot: Shot,
    iterations: usize,
}

enum StepFailure {
    LeftBox,
    Singular,
    Other,
}

fn classify_failure(e: &Error) -> StepFailure {
    match e {
        Error::LeftBox { .. } => StepFailure::LeftBox,
        Error::SingularShooting { .. } | Error::SingularMatrix { .. } | Error::SingularBlock { .. } => {
            StepFailure::Singular
        }
        _ => StepFailure::Other,
    }
}

/// Unit null vector of `[∂_λ r, ∂_p r]`, oriented along `reference`.
fn tangent(s: &Shot, reference: &Vector) -> Result<Vector> {
    let k = s.residual.len();
    let jac = augmented(s);
    let mut m = Matrix::zeros(k + 1, k + 1);
    m.rows_mut(0, k).copy_from(&jac);
    m.row_mut(k).copy_from(&reference.transpose());
    let mut rhs = Vector::zeros(k + 1);
    rhs[k] = 1.0;
    let v = Lu::factor(&m)?.solve(&rhs);
    Ok(&v / v.norm())
}

/// `[∂r/∂λ | ∂r/∂p]` for `r(λ, p) = P_λ(p) - p`.
fn augmented(s: &Shot) -> Matrix {
    let k = s.residual.len();
    let mut jac = Matrix::zeros(k, k + 1);
    jac.column_mut(0)
        .copy_from(&Vector::from_column_slice(&s.flow.lambda_sensitivity));
    jac.columns_mut(1, k).copy_from(&s.jacobian());
    jac
}

fn correct(sys: &SystemDef, u_prev: &Vector, t: &Vector, ds: f64, q: &[f64]) -> Result<Corrected> {
    let k = u_prev.len() - 1;
    let mut u = u_prev + t * ds;
    let mut q = q.to_vec();
    for iterations in 0..=CORRECTOR_MAX_ITER {
        let p: Vec<f64> = u.rows(1, k).iter().copied().collect();
        let s = shot(sys, u[0], &p, &q)?;
        let arc = t.dot(&(&u - u_prev)) - ds;
        if s.residual.norm() <= SHOOT_TOL && arc.abs() <= 1e-10 {
            return Ok(Corrected { u, shot: s, iterations });
        }
        let mut m = Matrix::zeros(k + 1, k + 1);
        m.rows_mut(0, k).copy_from(&augmented(&s));
        m.row_mut(k).copy_from(&t.transpose());
        let mut rhs = Vector::zeros(k + 1);
        rhs.rows_mut(0, k).copy_from(&s.residual);
        rhs[k] = arc;
        let du = Lu::factor(&m)?.solve(&rhs);
        u -= du;
        q = s.orbit.first().q.clone();
    }
    Err(Error::NoConvergence {
        what: "continuation corrector",
        iterations: CORRECTOR_MAX_ITER,
        residual: f64::NAN,
        point: u.iter().copied().collect(),
    })
}

fn as_u(lambda: f64, p: &[f64]) -> Vector {
    Vector::from_iterator(p.len() + 1, std::iter::once(lambda).chain(p.iter().copied()))
}

/// Follow the branch of periodic solutions emanating from a non-resonant
/// zero of F as λ grows from 0.
pub fn continue_branch(sys: &SystemDef, origin: &ZeroRecord, opts: &ContinuationOptions) -> Result<Branch> {
    if opts.lambda_max.is_nan() || opts.lambda_max < 0.0 {
        return Err(Error::Precondition(format!(
            "lambda_max must be nonnegative, got {}",
            opts.lambda_max
        )));
    }
    let verdict = classify_resonance(sys, origin)?;
    if verdict.verdict == Resonance::Resonant {
        return Err(Error::Precondition(format!(
            "zero at {:?} is resonant; no locally unique branch starts there",
            origin.point
        )));
    }
    let k = sys.k();
    let first = shoot(sys, 0.0, &origin.point[..k], &origin.point[k..])?;
    let mut u = as_u(0.0, &first.p0);
    let mut q = first.q0.clone();
    let start = shot(sys, 0.0, &first.p0, &q)?;
    let mut t = tangent(&start, &as_u(1.0, &vec![0.0; k]))?;
    if t[0] < 0.0 {
        t = -t;
    }

    let mut points = vec![first];
    let mut steps = vec![0.0];
    if opts.lambda_max == 0.0 {
        return Ok(Branch {
            points,
            origin: origin.clone(),
            termination: Termination::ReachedLambdaMax,
            steps,
        });
    }
    let mut ds = opts.initial_step.clamp(opts.min_step, opts.max_step);
    let mut easy = 0;

    let termination = loop {
        if points.len() > opts.max_steps {
            break Termination::MaxSteps;
        }
        let corrected = match correct(sys, &u, &t, ds, &q) {
            Ok(c) if (&c.u - &u).norm() <= 1.05 * ds => Ok(c),
            Ok(_) => Err(StepFailure::Other),
            Err(e) => Err(classify_failure(&e)),
        };
        let c = match corrected {
            Ok(c) => c,
            Err(kind) => {
                easy = 0;
                ds *= 0.5;
                if ds < opts.min_step {
                    if points.len() == 1 {
                        return Err(Error::NoConvergence {
                            what: "first continuation step",
                            iterations: CORRECTOR_MAX_ITER,
                            residual: f64::NAN,
                            point: u.iter().copied().collect(),
                        });
                    }
                    break match kind {
                        StepFailure::LeftBox => Termination::LeftBox,
                        StepFailure::Singular => Termination::SingularShooting,
                        StepFailure::Other => Termination::StepTooSmall,
                    };
                }
                continue;
            }
        };

        if c.u[0] < 0.0 {
            break Termination::ReturnedToTrivial;
        }
        if c.u[0] > opts.lambda_max {
            let frac = (opts.lambda_max - u[0]) / (c.u[0] - u[0]);
            let guess = &u + (&c.u - &u) * frac;
            let p: Vec<f64> = guess.rows(1, k).iter().copied().collect();
            let last = shoot(sys, opts.lambda_max, &p, &c.shot.orbit.first().q)?;
            steps.push((&as_u(last.lambda, &last.p0) - &u).norm());
            let exceeded = last.sup_norm > opts.norm_bound;
            points.push(last);
            break if exceeded {
                Termination::ExceededNormBound
            } else {
                Termination::ReachedLambdaMax
            };
        }

        let new_t = tangent(&c.shot, &t)?;
        let point = c.shot.into_point(c.u[0]);
        q = point.q0.clone();
        steps.push(ds);
        let exceeded = point.sup_norm > opts.norm_bound;
        points.push(point);
        if exceeded {
            break Termination::ExceededNormBound;
        }
        t = new_t;
        u = c.u;

        if c.iterations <= EASY_ITER {
            easy += 1;
            if easy >= EASY_STREAK {
                ds = (ds * 2.0).min(opts.max_step);
                easy = 0;
            }
        } else {
            easy = 0;
        }
    };

    Ok(Branch {
        points,
        origin: origin.clone(),
        termination,
        steps,
    })
}

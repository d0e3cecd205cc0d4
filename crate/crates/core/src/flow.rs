//! Fixed-step integration of `ζ̇ = Ψ(ζ) + λΥ(t, ζ)` on the constraint manifold.
//!
//! Each step is a classical RK4 step on the full `(x, y)` system followed by
//! a Newton projection of `y` back onto `g(x, ·) = 0`. The time-T map also
//! carries the variational equation of the reduced equation
//! `ẋ = f(x, γ(x)) + λh(t, x, γ(x))`, giving `∂x(T)/∂x(0)` and `∂x(T)/∂λ`.

use serde::Serialize;

use crate::dae::{ManifoldPoint, SystemDef};
use crate::degree::ZeroRecord;
use crate::error::{Error, Result};
use crate::linalg::{expm, serialize_rows, Matrix, Vector};

/// Post-projection residual allowed on an accepted trajectory.
pub const DRIFT_LIMIT: f64 = 1e-8;
const MIN_STEPS: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ManifoldPoint>,
    pub lambda: f64,
    /// Largest constraint residual of a stored state.
    pub max_constraint_drift: f64,
    /// Largest residual produced by an RK4 step before projection.
    pub max_step_defect: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> &ManifoldPoint {
        &self.states[0]
    }

    pub fn last(&self) -> &ManifoldPoint {
        self.states.last().expect("trajectory has at least one state")
    }

    /// `max_t |ζ(t) - ζ̄|` with `ζ̄` the sample mean.
    pub fn sup_norm(&self) -> f64 {
        let n = self.states[0].p.len() + self.states[0].q.len();
        let count = self.states.len() as f64;
        let mut mean = vec![0.0; n];
        for s in &self.states {
            for (m, v) in mean.iter_mut().zip(s.coords()) {
                *m += v / count;
            }
        }
        self.states
            .iter()
            .map(|s| {
                s.coords()
                    .iter()
                    .zip(&mean)
                    .map(|(v, m)| (v - m) * (v - m))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max_t |ζ(t) - η(t)|` for trajectories on the same time grid.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| {
                a.coords()
                    .iter()
                    .zip(b.coords())
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowResult {
    pub end: ManifoldPoint,
    /// `∂x(T)/∂x(0)` along the constraint branch.
    #[serde(serialize_with = "serialize_rows")]
    pub sensitivity: Matrix,
    /// `∂x(T)/∂λ`.
    pub lambda_sensitivity: Vec<f64>,
    pub max_constraint_drift: f64,
}

struct State {
    x: Vector,
    y: Vector,
    phi: Matrix,
    psi: Vector,
}

struct Rates {
    x: Vector,
    y: Vector,
    phi: Matrix,
    psi: Vector,
}

fn rates(sys: &SystemDef, t: f64, st: &State, lambda: f64, variational: bool) -> Result<Rates> {
    let (x, y) = (st.x.as_slice(), st.y.as_slice());
    if !variational {
        let v = sys.rhs_at(t, x, y, lambda)?;
        let k = sys.k();
        return Ok(Rates {
            x: v.rows(0, k).into_owned(),
            y: v.rows(k, sys.s()).into_owned(),
            phi: Matrix::zeros(0, 0),
            psi: Vector::zeros(0),
        });
    }
    let (k, s) = (sys.k(), sys.s());
    let pd = sys.partials(t, x, y, true)?;
    let lu = sys.factor_d2g(&pd.dg, x, y)?;
    let slope = sys.branch_slope(&lu, &pd.dg);
    let xdot = &pd.f + &pd.h * lambda;
    let ydot = &slope * &xdot;
    let forced = &pd.df + &pd.dh * lambda;
    let jac = forced.columns(0, k) + forced.columns(k, s) * &slope;
    Ok(Rates {
        x: xdot,
        phi: &jac * &st.phi,
        psi: &jac * &st.psi + &pd.h,
        y: ydot,
    })
}

fn advance(st: &State, r: &Rates, h: f64) -> State {
    State {
        x: &st.x + &r.x * h,
        y: &st.y + &r.y * h,
        phi: if r.phi.is_empty() {
            st.phi.clone()
        } else {
            &st.phi + &r.phi * h
        },
        psi: if r.psi.is_empty() {
            st.psi.clone()
        } else {
            &st.psi + &r.psi * h
        },
    }
}

fn rk4(sys: &SystemDef, t: f64, st: &State, h: f64, lambda: f64, variational: bool) -> Result<State> {
    let k1 = rates(sys, t, st, lambda, variational)?;
    let k2 = rates(sys, t + 0.5 * h, &advance(st, &k1, 0.5 * h), lambda, variational)?;
    let k3 = rates(sys, t + 0.5 * h, &advance(st, &k2, 0.5 * h), lambda, variational)?;
    let k4 = rates(sys, t + h, &advance(st, &k3, h), lambda, variational)?;
    let combine = |a: &Vector, b: &Vector, c: &Vector, d: &Vector| (a + b * 2.0 + c * 2.0 + d) * (h / 6.0);
    let mut next = State {
        x: &st.x + combine(&k1.x, &k2.x, &k3.x, &k4.x),
        y: &st.y + combine(&k1.y, &k2.y, &k3.y, &k4.y),
        phi: st.phi.clone(),
        psi: st.psi.clone(),
    };
    if variational {
        next.phi += (&k1.phi + &k2.phi * 2.0 + &k3.phi * 2.0 + &k4.phi) * (h / 6.0);
        next.psi += combine(&k1.psi, &k2.psi, &k3.psi, &k4.psi);
    }
    Ok(next)
}

struct Run {
    trajectory: Option<Trajectory>,
    end: ManifoldPoint,
    phi: Matrix,
    psi: Vector,
    drift: f64,
}

#[allow(clippy::too_many_arguments)]
fn run(
    sys: &SystemDef,
    lambda: f64,
    start: &ManifoldPoint,
    t0: f64,
    t1: f64,
    steps: usize,
    variational: bool,
    keep: bool,
) -> Result<Run> {
    if steps < MIN_STEPS {
        return Err(Error::Precondition(format!(
            "need at least {MIN_STEPS} steps, got {steps}"
        )));
    }
    if start.residual > sys.tol.constraint {
        return Err(Error::Precondition(format!(
            "start point is off the manifold (residual {:.3e})",
            start.residual
        )));
    }
    let k = sys.k();
    let h = (t1 - t0) / steps as f64;
    let mut st = State {
        x: Vector::from_column_slice(&start.p),
        y: Vector::from_column_slice(&start.q),
        phi: if variational {
            Matrix::identity(k, k)
        } else {
            Matrix::zeros(0, 0)
        },
        psi: if variational {
            Vector::zeros(k)
        } else {
            Vector::zeros(0)
        },
    };
    let mut times = Vec::new();
    let mut states = Vec::new();
    if keep {
        times.reserve(steps + 1);
        states.reserve(steps + 1);
        times.push(t0);
        states.push(start.clone());
    }
    let mut drift = start.residual;
    let mut defect: f64 = 0.0;
    let mut current = start.clone();
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let next = rk4(sys, t, &st, h, lambda, variational)?;
        let t_next = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * h };
        let raw: Vec<f64> = next.x.iter().chain(next.y.iter()).copied().collect();
        if raw.iter().any(|v| !v.is_finite()) || !sys.region().contains(&raw) {
            return Err(Error::LeftBox {
                time: t_next,
                point: raw,
            });
        }
        defect = defect.max(sys.eval_g(next.x.as_slice(), next.y.as_slice())?.norm());
        let pt = sys.project(next.x.as_slice(), next.y.as_slice())?;
        if !sys.region().contains(&pt.coords()) {
            return Err(Error::LeftBox {
                time: t_next,
                point: pt.coords(),
            });
        }
        drift = drift.max(pt.residual);
        st = State {
            x: next.x,
            y: Vector::from_column_slice(&pt.q),
            phi: next.phi,
            psi: next.psi,
        };
        if keep {
            times.push(t_next);
            states.push(pt.clone());
        }
        current = pt;
    }
    assert!(
        drift <= DRIFT_LIMIT,
        "constraint drift {drift:.3e} exceeds {DRIFT_LIMIT:.0e} after projection"
    );
    let trajectory = keep.then_some(Trajectory {
        times,
        states,
        lambda,
        max_constraint_drift: drift,
        max_step_defect: defect,
    });
    Ok(Run {
        trajectory,
        end: current,
        phi: st.phi,
        psi: st.psi,
        drift,
    })
}

/// Trajectory over `[t0, t1]` sampled at `steps + 1` uniform times.
pub fn integrate(
    sys: &SystemDef,
    lambda: f64,
    start: &ManifoldPoint,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Trajectory> {
    let r = run(sys, lambda, start, t0, t1, steps, false, true)?;
    Ok(r.trajectory.expect("trajectory kept"))
}

/// Time-T map with sensitivities, using the system's default step count.
pub fn time_t_map(sys: &SystemDef, lambda: f64, p0: &[f64], q_guess: &[f64]) -> Result<FlowResult> {
    Ok(time_t_map_with(sys, lambda, p0, q_guess, sys.tol.steps, false)?.0)
}

/// Time-T map with an explicit step count, optionally returning the orbit.
pub fn time_t_map_with(
    sys: &SystemDef,
    lambda: f64,
    p0: &[f64],
    q_guess: &[f64],
    steps: usize,
    keep_trajectory: bool,
) -> Result<(FlowResult, Option<Trajectory>)> {
    period_map(sys, lambda, p0, q_guess, steps, keep_trajectory, false)
}

/// Inverse of the time-T map: the state at `t = 0` of the solution that
/// passes through `(p, q)` at `t = T`.
pub fn inverse_time_t_map(
    sys: &SystemDef,
    lambda: f64,
    p: &[f64],
    q_guess: &[f64],
    steps: usize,
) -> Result<FlowResult> {
    Ok(period_map(sys, lambda, p, q_guess, steps, false, true)?.0)
}

fn period_map(
    sys: &SystemDef,
    lambda: f64,
    p0: &[f64],
    q_guess: &[f64],
    steps: usize,
    keep_trajectory: bool,
    reverse: bool,
) -> Result<(FlowResult, Option<Trajectory>)> {
    let start = sys.project(p0, q_guess)?;
    let (t0, t1) = if reverse {
        (sys.period(), 0.0)
    } else {
        (0.0, sys.period())
    };
    let r = run(sys, lambda, &start, t0, t1, steps, true, keep_trajectory)?;
    if r.phi.iter().chain(r.psi.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok((
        FlowResult {
            end: r.end,
            sensitivity: r.phi,
            lambda_sensitivity: r.psi.iter().copied().collect(),
            max_constraint_drift: r.drift,
        },
        r.trajectory,
    ))
}

/// `exp(A T)` for the reduced linearization `A` at a zero of F.
pub fn monodromy_at_zero(sys: &SystemDef, z: &ZeroRecord) -> Result<Matrix> {
    let a = sys.reduced_linearization(&z.point)?;
    expm(&(a * sys.period()))
}

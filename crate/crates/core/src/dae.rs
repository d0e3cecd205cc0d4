//! Semi-explicit index-1 systems `ẋ = f(x,y) + λh(t,x,y)`, `g(x,y) = 0`.
//!
//! A [`SystemDef`] owns every formula of a problem instance. All formulas share
//! the variable list `[t, x1..xk, y1..ys]`, so a point is evaluated from one
//! slice `[t, x.., y..]`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, system_vars, DualValue, Expression};
use crate::field::{ad_jacobian, VectorField};
use crate::linalg::{Lu, Matrix, Vector};
use crate::region::Region;

/// Numerical knobs shared by the solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Constraint residual accepted by the projection Newton iteration.
    pub constraint: f64,
    /// Iteration cap of the projection Newton iteration.
    pub newton_max_iter: usize,
    /// Fixed integration steps per period.
    pub steps: usize,
    /// Multistart grid points per dimension.
    pub grid: usize,
    /// Quasi-random samples for the d2g hypothesis check.
    pub samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            constraint: 1e-10,
            newton_max_iter: 50,
            steps: 512,
            grid: 16,
            samples: 1024,
        }
    }
}

/// A point `(p, q)` on the constraint manifold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifoldPoint {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub residual: f64,
}

impl ManifoldPoint {
    pub fn coords(&self) -> Vec<f64> {
        self.p.iter().chain(&self.q).copied().collect()
    }
}

/// Outcome of a successful hypothesis check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub min_abs_det: f64,
    pub min_location: Vec<f64>,
    pub sign: i8,
}

/// Values and Jacobians (with respect to `(x, y)`) of f, g, h at one point.
#[derive(Clone, Debug)]
pub struct Partials {
    pub f: Vector,
    pub g: Vector,
    pub h: Vector,
    pub df: Matrix,
    pub dg: Matrix,
    pub dh: Matrix,
}

#[derive(Clone, Debug)]
pub struct SystemDef {
    k: usize,
    s: usize,
    period: f64,
    vars: Arc<[String]>,
    f: Vec<Expression>,
    g: Vec<Expression>,
    h: Vec<Expression>,
    region: Region,
    d2g_det: Expression,
    pub tol: Tolerances,
}

impl SystemDef {
    pub fn new(
        k: usize,
        s: usize,
        period: f64,
        f: Vec<Expression>,
        g: Vec<Expression>,
        h: Vec<Expression>,
        region: Region,
    ) -> Result<Self> {
        let vars = system_vars(k, s);
        let invalid = |m: String| Err(Error::InvalidSystem(m));
        if k == 0 || s == 0 {
            return invalid(format!("dimensions must be positive, got k = {k}, s = {s}"));
        }
        if !(period.is_finite() && period > 0.0) {
            return invalid(format!("period must be positive, got {period}"));
        }
        if f.len() != k || h.len() != k || g.len() != s {
            return invalid(format!(
                "expected {k} f, {s} g and {k} h formulas, got {}, {}, {}",
                f.len(),
                g.len(),
                h.len()
            ));
        }
        if region.dim() != k + s {
            return invalid(format!("box has {} dimensions, system has {}", region.dim(), k + s));
        }
        for (label, list) in [("f", &f), ("g", &g), ("h", &h)] {
            for (i, e) in list.iter().enumerate() {
                if e.vars() != &*vars {
                    return invalid(format!("{label}{} is not over [t, x.., y..]", i + 1));
                }
            }
        }
        for (label, list) in [("f", &f), ("g", &g)] {
            if let Some(i) = list.iter().position(|e| e.uses_slot(0)) {
                return invalid(format!("{label}{} depends on t; f and g must be autonomous", i + 1));
            }
        }
        let d2g_det = symbolic_det(&g, k);
        Ok(Self {
            k,
            s,
            period,
            vars,
            f,
            g,
            h,
            region,
            d2g_det,
            tol: Tolerances::default(),
        })
    }

    /// Build from formula strings; an empty `h` means `h ≡ 0`.
    pub fn from_strs(
        k: usize,
        s: usize,
        period: f64,
        f: &[&str],
        g: &[&str],
        h: &[&str],
        region: Region,
    ) -> Result<Self> {
        let vars = system_vars(k, s);
        let p = |list: &[&str]| -> Result<Vec<Expression>> {
            list.iter()
                .map(|src| parse(src, vars.clone()).map_err(Error::from))
                .collect()
        };
        let h = if h.is_empty() {
            (0..k).map(|_| Expression::constant(vars.clone(), 0.0)).collect()
        } else {
            p(h)?
        };
        Self::new(k, s, period, p(f)?, p(g)?, h, region)
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_region(mut self, region: Region) -> Result<Self> {
        if region.dim() != self.k + self.s {
            return Err(Error::InvalidSystem("box dimension mismatch".into()));
        }
        self.region = region;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.k + self.s
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn vars(&self) -> Arc<[String]> {
        self.vars.clone()
    }

    pub fn f(&self) -> &[Expression] {
        &self.f
    }

    pub fn g(&self) -> &[Expression] {
        &self.g
    }

    pub fn h(&self) -> &[Expression] {
        &self.h
    }

    /// `det ∂₂g` as a formula.
    pub fn d2g_det(&self) -> &Expression {
        &self.d2g_det
    }

    pub fn has_forcing(&self) -> bool {
        self.h.iter().any(|e| !e.is_zero())
    }

    /// Copy with `f` replaced by `scale * f`.
    pub fn with_scaled_f(&self, scale: f64) -> Self {
        let c = Expression::constant(self.vars.clone(), scale);
        let mut out = self.clone();
        out.f = self.f.iter().map(|e| c.mul(e)).collect();
        out
    }

    /// Copy with `h` replaced.
    pub fn with_forcing(&self, h: Vec<Expression>) -> Result<Self> {
        Self::new(
            self.k,
            self.s,
            self.period,
            self.f.clone(),
            self.g.clone(),
            h,
            self.region.clone(),
        )
        .map(|s| s.with_tolerances(self.tol.clone()))
    }

    fn slot_values(&self, t: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.k + self.s);
        v.push(t);
        v.extend_from_slice(x);
        v.extend_from_slice(y);
        v
    }

    fn eval_list(list: &[Expression], values: &[f64]) -> Result<Vector> {
        let vals = list.iter().map(|e| e.eval(values)).collect::<Result<Vec<_>, _>>()?;
        Ok(Vector::from_vec(vals))
    }

    pub fn eval_f(&self, x: &[f64], y: &[f64]) -> Result<Vector> {
        Self::eval_list(&self.f, &self.slot_values(0.0, x, y))
    }

    pub fn eval_g(&self, x: &[f64], y: &[f64]) -> Result<Vector> {
        Self::eval_list(&self.g, &self.slot_values(0.0, x, y))
    }

    pub fn eval_h(&self, t: f64, x: &[f64], y: &[f64]) -> Result<Vector> {
        Self::eval_list(&self.h, &self.slot_values(t, x, y))
    }

    /// Jacobian of g with respect to `(x, y)`, shape `s × (k+s)`.
    pub fn jac_g(&self, x: &[f64], y: &[f64]) -> Result<Matrix> {
        ad_jacobian(&self.g, &self.slot_values(0.0, x, y), 1, self.n())
    }

    /// Values and Jacobians of f, g, h; `with_h` skips the forcing terms.
    pub fn partials(&self, t: f64, x: &[f64], y: &[f64], with_h: bool) -> Result<Partials> {
        let values = self.slot_values(t, x, y);
        let n = self.n();
        let zeros_h = || (Vector::zeros(self.k), Matrix::zeros(self.k, n));
        let (h, dh) = if with_h {
            (Self::eval_list(&self.h, &values)?, ad_jacobian(&self.h, &values, 1, n)?)
        } else {
            zeros_h()
        };
        Ok(Partials {
            f: Self::eval_list(&self.f, &values)?,
            g: Self::eval_list(&self.g, &values)?,
            h,
            df: ad_jacobian(&self.f, &values, 1, n)?,
            dg: ad_jacobian(&self.g, &values, 1, n)?,
            dh,
        })
    }

    /// LU of the ∂₂g block of `dg`, mapping singularity to a located error.
    pub(crate) fn factor_d2g(&self, dg: &Matrix, x: &[f64], y: &[f64]) -> Result<Lu> {
        let d2g = dg.columns(self.k, self.s).into_owned();
        Lu::factor(&d2g).map_err(|_| Error::SingularBlock {
            point: x.iter().chain(y).copied().collect(),
        })
    }

    /// `A = ∂₁f - ∂₂f [∂₂g]⁻¹ ∂₁g` at `z = (x, y)`, the linearization of the
    /// reduced equation on the constraint branch through `z`.
    pub fn reduced_linearization(&self, z: &[f64]) -> Result<Matrix> {
        let jac = VectorField::jacobian(self, z)?;
        crate::linalg::schur_complement(&jac, self.k).map_err(|e| match e {
            Error::SingularBlock { .. } => Error::SingularBlock { point: z.to_vec() },
            other => other,
        })
    }

    /// `dγ = -[∂₂g]⁻¹ ∂₁g`, the slope of the constraint branch (shape `s × k`).
    pub(crate) fn branch_slope(&self, lu: &Lu, dg: &Matrix) -> Matrix {
        -lu.solve_matrix(&dg.columns(0, self.k).into_owned())
    }

    /// Check the ∂₂g invertibility hypothesis on quasi-random box samples.
    pub fn validate(&self, samples: usize) -> Result<ValidationReport> {
        crate::validate::validate(self, samples)
    }

    /// Newton on `q ↦ g(p, q)` from `q_guess`, holding `p` fixed.
    pub fn solve_constraint(&self, p: &[f64], q_guess: &[f64]) -> Result<ManifoldPoint> {
        self.constraint_newton(p, q_guess, false)
    }

    /// Like [`SystemDef::solve_constraint`], but always iterates until the
    /// Newton step stagnates, so that the result depends smoothly on `p`.
    pub fn project(&self, p: &[f64], q_guess: &[f64]) -> Result<ManifoldPoint> {
        self.constraint_newton(p, q_guess, true)
    }

    fn constraint_newton(&self, p: &[f64], q_guess: &[f64], polish: bool) -> Result<ManifoldPoint> {
        let mut q = q_guess.to_vec();
        let mut r = self.eval_g(p, &q)?;
        let mut iterations = 0;
        let mut stalled = !polish;
        while r.norm() > self.tol.constraint || !stalled {
            if iterations == self.tol.newton_max_iter || !r.norm().is_finite() {
                if r.norm() <= self.tol.constraint {
                    break;
                }
                return Err(Error::NoConvergence {
                    what: "constraint projection",
                    iterations,
                    residual: r.norm(),
                    point: p.iter().chain(&q).copied().collect(),
                });
            }
            let dg = self.jac_g(p, &q)?;
            let lu = self.factor_d2g(&dg, p, &q)?;
            let step = lu.solve(&r);
            let qnorm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            for (qi, di) in q.iter_mut().zip(step.iter()) {
                *qi -= di;
            }
            stalled = step.norm() <= 1e-15 * (1.0 + qnorm);
            r = self.eval_g(p, &q)?;
            iterations += 1;
        }
        let dg = self.jac_g(p, &q)?;
        self.factor_d2g(&dg, p, &q)?;
        Ok(ManifoldPoint {
            p: p.to_vec(),
            q,
            residual: r.norm(),
        })
    }

    fn tangent_lift(&self, pt: &ManifoldPoint, dg: &Matrix, xdot: Vector) -> Result<Vector> {
        let lu = self.factor_d2g(dg, &pt.p, &pt.q)?;
        let ydot = -lu.solve(&(dg.columns(0, self.k) * &xdot));
        Ok(Vector::from_iterator(self.n(), xdot.iter().chain(ydot.iter()).copied()))
    }

    /// Ψ(p,q) = (f, -[∂₂g]⁻¹ ∂₁g f).
    pub fn psi(&self, pt: &ManifoldPoint) -> Result<Vector> {
        let dg = self.jac_g(&pt.p, &pt.q)?;
        self.tangent_lift(pt, &dg, self.eval_f(&pt.p, &pt.q)?)
    }

    /// Υ(t,p,q) = (h, -[∂₂g]⁻¹ ∂₁g h).
    pub fn upsilon(&self, t: f64, pt: &ManifoldPoint) -> Result<Vector> {
        let dg = self.jac_g(&pt.p, &pt.q)?;
        self.tangent_lift(pt, &dg, self.eval_h(t, &pt.p, &pt.q)?)
    }

    /// Ψ + λΥ with a single factorization of ∂₂g.
    pub fn rhs_full(&self, t: f64, pt: &ManifoldPoint, lambda: f64) -> Result<Vector> {
        self.rhs_at(t, &pt.p, &pt.q, lambda)
    }

    /// Ψ + λΥ at an arbitrary (not necessarily constrained) point.
    pub fn rhs_at(&self, t: f64, x: &[f64], y: &[f64], lambda: f64) -> Result<Vector> {
        let mut xdot = self.eval_f(x, y)?;
        if lambda != 0.0 {
            xdot += self.eval_h(t, x, y)? * lambda;
        }
        let dg = self.jac_g(x, y)?;
        let lu = self.factor_d2g(&dg, x, y)?;
        let ydot = -lu.solve(&(dg.columns(0, self.k) * &xdot));
        Ok(Vector::from_iterator(self.n(), xdot.iter().chain(ydot.iter()).copied()))
    }

    /// |dg(p,q)[v]|, the failure of `v` to be tangent to the manifold.
    pub fn tangency_defect(&self, pt: &ManifoldPoint, v: &[f64]) -> Result<f64> {
        let values = self.slot_values(0.0, &pt.p, &pt.q);
        let duals: Vec<DualValue> = values
            .iter()
            .enumerate()
            .map(|(i, &val)| DualValue::new(val, if i == 0 { 0.0 } else { v[i - 1] }))
            .collect();
        let mut sq = 0.0;
        for e in &self.g {
            let d = e.eval_generic(&duals)?.derivative;
            sq += d * d;
        }
        Ok(sq.sqrt())
    }
}

impl VectorField for SystemDef {
    fn dim(&self) -> usize {
        self.n()
    }

    fn eval(&self, z: &[f64]) -> Result<Vector> {
        let (x, y) = z.split_at(self.k);
        let f = self.eval_f(x, y)?;
        let g = self.eval_g(x, y)?;
        Ok(Vector::from_iterator(self.n(), f.iter().chain(g.iter()).copied()))
    }

    fn jacobian(&self, z: &[f64]) -> Result<Matrix> {
        let mut values = Vec::with_capacity(z.len() + 1);
        values.push(0.0);
        values.extend_from_slice(z);
        let fg: Vec<Expression> = self.f.iter().chain(&self.g).cloned().collect();
        ad_jacobian(&fg, &values, 1, self.n())
    }

    fn block_split(&self) -> Option<usize> {
        Some(self.k)
    }
}

/// det [∂g_i/∂y_j] by cofactor expansion of the symbolic partials.
fn symbolic_det(g: &[Expression], k: usize) -> Expression {
    let entries: Vec<Vec<Expression>> = g
        .iter()
        .map(|gi| (0..g.len()).map(|j| gi.symbolic_diff_slot(1 + k + j)).collect())
        .collect();
    let cols: Vec<usize> = (0..g.len()).collect();
    cofactor(&entries, 0, &cols)
}

fn cofactor(m: &[Vec<Expression>], row: usize, cols: &[usize]) -> Expression {
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc: Option<Expression> = None;
    for (pos, &c) in cols.iter().enumerate() {
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = m[row][c].mul(&cofactor(m, row + 1, &rest));
        acc = Some(match acc {
            None if pos % 2 == 0 => term,
            None => term.neg(),
            Some(a) if pos % 2 == 0 => a.add(&term),
            Some(a) => a.sub(&term),
        });
    }
    acc.expect("non-empty cofactor expansion")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_oscillator() -> SystemDef {
        SystemDef::from_strs(
            2,
            1,
            std::f64::consts::TAU,
            &["x2", "-x1 + y1 - x2"],
            &["y1^3 + y1 - x1^2"],
            &[],
            Region::cube(3, 2.0),
        )
        .unwrap()
    }

    #[test]
    fn rejects_time_dependent_constraint() {
        let err = SystemDef::from_strs(1, 1, 1.0, &["y1"], &["y1 - sin(t)"], &[], Region::cube(2, 1.0));
        assert!(matches!(err, Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn rejects_bad_period_and_dims() {
        assert!(SystemDef::from_strs(1, 1, 0.0, &["y1"], &["y1"], &[], Region::cube(2, 1.0)).is_err());
        assert!(SystemDef::from_strs(1, 1, 1.0, &["y1"], &["y1"], &[], Region::cube(3, 1.0)).is_err());
    }

    #[test]
    fn constraint_solver_examples() {
        let sys = cubic_oscillator();
        let pt = sys.solve_constraint(&[0.0, 0.0], &[0.5]).unwrap();
        assert!(pt.q[0].abs() < 1e-10 && pt.residual <= 1e-10);
        let pt = sys.solve_constraint(&[2f64.sqrt(), 0.3], &[1.2]).unwrap();
        assert!((pt.q[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constraint_solver_keeps_satisfied_guess() {
        let sys = cubic_oscillator();
        let q = 0.682_327_803_828_019_3;
        let pt = sys.solve_constraint(&[1.0, 1.0], &[q]).unwrap();
        assert_eq!(pt.q[0], q);
    }

    #[test]
    fn singular_block_at_cusp() {
        let sys = SystemDef::from_strs(1, 1, 1.0, &["1"], &["x1 - y1^3"], &[], Region::cube(2, 2.0)).unwrap();
        assert!(matches!(
            sys.solve_constraint(&[0.0], &[0.0]),
            Err(Error::SingularBlock { .. })
        ));
    }

    #[test]
    fn psi_matches_closed_form() {
        let sys = cubic_oscillator();
        assert_eq!(
            sys.psi(&sys.solve_constraint(&[0.0, 0.0], &[0.0]).unwrap()).unwrap(),
            Vector::zeros(3)
        );
        let pt = sys.solve_constraint(&[1.0, 1.0], &[0.5]).unwrap();
        let q = pt.q[0];
        let v = sys.psi(&pt).unwrap();
        let want = [1.0, -1.0 + q - 1.0, 2.0 / (1.0 + 3.0 * q * q)];
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
        assert!(sys.tangency_defect(&pt, v.as_slice()).unwrap() < 1e-12);
    }

    #[test]
    fn lifted_f_without_correction_is_not_tangent() {
        let sys = cubic_oscillator();
        let pt = sys.solve_constraint(&[1.0, 1.0], &[0.5]).unwrap();
        let f = sys.eval_f(&pt.p, &pt.q).unwrap();
        let v = [f[0], f[1], 0.0];
        // dg[v] = -2 p1 f1 = -2 here.
        assert!((sys.tangency_defect(&pt, &v).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn symbolic_d2g_det_for_two_constraints() {
        let sys = SystemDef::from_strs(
            1,
            2,
            1.0,
            &["y1"],
            &["y1 + y2^3 - x1", "y1*y2 + 2*y2"],
            &[],
            Region::cube(3, 1.0),
        )
        .unwrap();
        // [[1, 3y2²], [y2, y1 + 2]] → y1 + 2 - 3y2³
        let d = sys.d2g_det();
        let z = [0.0, 0.4, 0.7, -0.3];
        let want = 0.7 + 2.0 - 3.0 * (-0.3f64).powi(3);
        assert!((d.eval(&z).unwrap() - want).abs() < 1e-14);
    }
}

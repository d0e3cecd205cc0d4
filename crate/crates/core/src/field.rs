//! Vector maps ℝⁿ → ℝⁿ that the degree machinery operates on.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse, DualValue, Expression};
use crate::linalg::{Matrix, Vector};

pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, z: &[f64]) -> Result<Vector>;

    fn jacobian(&self, z: &[f64]) -> Result<Matrix>;

    /// Number of leading coordinates forming the `x` block when the map has
    /// the `(f, g)` structure of a semi-explicit DAE.
    fn block_split(&self) -> Option<usize> {
        None
    }
}

/// Jacobian of `exprs` with respect to the `n` slots starting at `first_slot`,
/// by one forward-mode pass per input direction.
pub(crate) fn ad_jacobian(exprs: &[Expression], values: &[f64], first_slot: usize, n: usize) -> Result<Matrix> {
    let mut jac = Matrix::zeros(exprs.len(), n);
    let mut duals: Vec<DualValue> = values.iter().map(|&v| DualValue::new(v, 0.0)).collect();
    for j in 0..n {
        duals[first_slot + j].derivative = 1.0;
        for (i, e) in exprs.iter().enumerate() {
            jac[(i, j)] = e.eval_generic(&duals)?.derivative;
        }
        duals[first_slot + j].derivative = 0.0;
    }
    Ok(jac)
}

/// A vector map given by one expression per component; the inputs are the
/// expressions' variables, in declaration order.
#[derive(Clone, Debug)]
pub struct ExprMap {
    components: Vec<Expression>,
}

impl ExprMap {
    pub fn new(components: Vec<Expression>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::InvalidSystem("empty map".into()));
        }
        if components
            .iter()
            .any(|c| c.vars().len() != n || c.vars() != components[0].vars())
        {
            return Err(Error::InvalidSystem(
                "map components must share a variable list of the same length".into(),
            ));
        }
        Ok(Self { components })
    }

    /// Parse one formula per component over `vars`.
    pub fn parse(formulas: &[&str], vars: &[&str]) -> Result<Self> {
        let vars: Arc<[String]> = vars.iter().map(|v| v.to_string()).collect();
        let components = formulas
            .iter()
            .map(|f| parse(f, vars.clone()).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }
}

impl VectorField for ExprMap {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn eval(&self, z: &[f64]) -> Result<Vector> {
        let vals = self
            .components
            .iter()
            .map(|c| c.eval(z))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Vector::from_vec(vals))
    }

    fn jacobian(&self, z: &[f64]) -> Result<Matrix> {
        ad_jacobian(&self.components, z, 0, self.dim())
    }
}

/// `field + shift`, with `shift` added to the leading components.
pub struct Shifted<'a> {
    pub inner: &'a dyn VectorField,
    pub shift: Vec<f64>,
}

impl VectorField for Shifted<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, z: &[f64]) -> Result<Vector> {
        let mut v = self.inner.eval(z)?;
        for (vi, c) in v.iter_mut().zip(&self.shift) {
            *vi += c;
        }
        Ok(v)
    }

    fn jacobian(&self, z: &[f64]) -> Result<Matrix> {
        self.inner.jacobian(z)
    }

    fn block_split(&self) -> Option<usize> {
        self.inner.block_split()
    }
}

/// Adapter for closures; the Jacobian closure is supplied by the caller.
pub struct FnField<F, J> {
    pub dim: usize,
    pub eval: F,
    pub jacobian: J,
}

impl<F, J> VectorField for FnField<F, J>
where
    F: Fn(&[f64]) -> Result<Vector> + Sync,
    J: Fn(&[f64]) -> Result<Matrix> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, z: &[f64]) -> Result<Vector> {
        (self.eval)(z)
    }

    fn jacobian(&self, z: &[f64]) -> Result<Matrix> {
        (self.jacobian)(z)
    }
}

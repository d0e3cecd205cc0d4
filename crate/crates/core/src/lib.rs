//! Numerical toolkit for semi-explicit index-1 DAEs `ẋ = f(x,y)`, `g(x,y) = 0`
//! and their periodic perturbations `ẋ = f(x,y) + λh(t,x,y)`.
//!
//! The crate computes the degree of the tangent field induced on the
//! constraint manifold, classifies equilibria by resonance with the forcing
//! period, and traces branches of periodic solutions.

pub mod dae;
pub mod degree;
pub mod error;
pub mod expr;
pub mod field;
pub mod flow;
pub mod linalg;
pub mod periodic;
pub mod region;
mod validate;

pub use dae::{ManifoldPoint, SystemDef, Tolerances, ValidationReport};
pub use error::{Error, ExprError, Result};
pub use expr::{parse, Expression};
pub use region::Region;

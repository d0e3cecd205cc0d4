//! Named degree strategies, selectable at runtime.

use super::oracle::{degree_boundary_oracle, interval_degree, perturb_vote};
use super::zeros::{degree_sum, find_zeros};
use super::DegreeOptions;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::region::Region;

pub trait DegreeMethod: Send + Sync {
    fn name(&self) -> &'static str;

    fn describe(&self) -> &'static str;

    fn degree(&self, field: &dyn VectorField, region: &Region, opts: &DegreeOptions) -> Result<i64>;
}

/// Signed count of zeros found by multistart Newton. Fails on degenerate zeros.
pub struct ZeroSum;

impl DegreeMethod for ZeroSum {
    fn name(&self) -> &'static str {
        "zero-sum"
    }

    fn describe(&self) -> &'static str {
        "sum of Jacobian signs over the zeros found by multistart Newton"
    }

    fn degree(&self, field: &dyn VectorField, region: &Region, opts: &DegreeOptions) -> Result<i64> {
        let set = find_zeros(field, region, opts.grid)?;
        degree_sum(&set.zeros, region)
    }
}

/// Endpoint signs in one dimension, winding number in two.
pub struct Winding;

impl DegreeMethod for Winding {
    fn name(&self) -> &'static str {
        "winding"
    }

    fn describe(&self) -> &'static str {
        "boundary winding number (dimension 1 or 2 only)"
    }

    fn degree(&self, field: &dyn VectorField, region: &Region, opts: &DegreeOptions) -> Result<i64> {
        match region.dim() {
            1 => interval_degree(field, region),
            2 => degree_boundary_oracle(field, region, opts.grid, opts.boundary_per_dim, opts.seed),
            d => Err(Error::Precondition(format!(
                "the winding method works in dimension 1 or 2, not {d}"
            ))),
        }
    }
}

/// Majority vote over small random constant perturbations.
pub struct PerturbVote;

impl DegreeMethod for PerturbVote {
    fn name(&self) -> &'static str {
        "perturb-vote"
    }

    fn describe(&self) -> &'static str {
        "zero sum of three randomly perturbed fields, majority vote"
    }

    fn degree(&self, field: &dyn VectorField, region: &Region, opts: &DegreeOptions) -> Result<i64> {
        perturb_vote(field, region, opts.grid, opts.boundary_per_dim, opts.seed)
    }
}

/// Winding number up to dimension 2, perturbation vote above.
pub struct BoundaryOracle;

impl DegreeMethod for BoundaryOracle {
    fn name(&self) -> &'static str {
        "boundary-oracle"
    }

    fn describe(&self) -> &'static str {
        "winding number in the plane, perturbation vote in higher dimensions"
    }

    fn degree(&self, field: &dyn VectorField, region: &Region, opts: &DegreeOptions) -> Result<i64> {
        degree_boundary_oracle(field, region, opts.grid, opts.boundary_per_dim, opts.seed)
    }
}

/// Zero sum, falling back to the boundary oracle when a zero is degenerate.
pub struct Auto;

impl DegreeMethod for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn describe(&self) -> &'static str {
        "zero sum, or the boundary oracle when some zero is degenerate"
    }

    fn degree(&self, field: &dyn VectorField, region: &Region, opts: &DegreeOptions) -> Result<i64> {
        match ZeroSum.degree(field, region, opts) {
            Err(Error::DegenerateZeros { .. }) => BoundaryOracle.degree(field, region, opts),
            other => other,
        }
    }
}

pub struct DegreeMethods {
    methods: Vec<Box<dyn DegreeMethod>>,
}

impl Default for DegreeMethods {
    fn default() -> Self {
        let mut reg = Self { methods: Vec::new() };
        reg.register(Box::new(Auto));
        reg.register(Box::new(ZeroSum));
        reg.register(Box::new(Winding));
        reg.register(Box::new(PerturbVote));
        reg.register(Box::new(BoundaryOracle));
        reg
    }
}

impl DegreeMethods {
    /// Add a method; a method with the same name is replaced.
    pub fn register(&mut self, method: Box<dyn DegreeMethod>) {
        self.methods.retain(|m| m.name() != method.name());
        self.methods.push(method);
    }

    pub fn get(&self, name: &str) -> Result<&dyn DegreeMethod> {
        self.methods
            .iter()
            .find(|m| m.name() == name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "degree method",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.iter().map(|m| m.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn DegreeMethod> {
        self.methods.iter().map(|m| m.as_ref())
    }
}

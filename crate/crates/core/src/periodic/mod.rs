//! Periodic solutions of the perturbed system: resonance of equilibria,
//! shooting, branch continuation in λ, multiplicity scans, and the reductions
//! of Hessenberg and implicit problems to semi-explicit form.

mod continuation;
mod multiplicity;
mod reduce;
mod resonance;
mod shoot;

pub use continuation::{continue_branch, Branch, ContinuationOptions, Termination};
pub use multiplicity::{multiplicity_scan, ORBIT_DEDUPE};
pub use reduce::{reduce_hessenberg, reduce_implicit, HessenbergProblem, ImplicitReduction};
pub use resonance::{classify_resonance, Resonance, ResonanceVerdict, RESONANCE_TOL};
pub use shoot::{shoot, BranchPoint, SHOOT_TOL};

use anyhow::{bail, Result};
use clap::Arg;
use semidae::degree::{find_zeros, ZeroRecord};
use semidae::periodic::{
    classify_resonance, continue_branch, multiplicity_scan, shoot, ContinuationOptions, Resonance,
};
use semidae::SystemDef;
use serde_json::json;

use super::{list_arg, Command, Invocation, Outcome};
use crate::output::Table;

fn regular_zeros(sys: &SystemDef) -> Result<Vec<ZeroRecord>> {
    sys.validate(sys.tol.samples)?;
    let set = find_zeros(sys, sys.region(), sys.tol.grid)?;
    Ok(set.zeros.into_iter().filter(|z| !z.degenerate).collect())
}

fn check_len(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        bail!("--{name} needs {n} components, got {}", v.len());
    }
    Ok(())
}

pub struct Shoot;

impl Command for Shoot {
    fn name(&self) -> &'static str {
        "shoot"
    }

    fn about(&self) -> &'static str {
        "find a T-periodic solution at fixed λ by Newton shooting"
    }

    fn extra_args(&self) -> Vec<Arg> {
        vec![
            list_arg("p0", "initial guess for x(0); defaults to a regular zero of F"),
            list_arg("q0", "initial guess for y(0)"),
        ]
    }

    fn run(&self, inv: &Invocation) -> Result<Outcome> {
        let sys = inv.system()?;
        let (k, s) = (sys.k(), sys.s());
        let y_mid = sys.region().project(k..sys.n()).at(&vec![0.5; s]);
        let (p, q) = match inv.list("p0")? {
            Some(p) => (p, y_mid),
            None => match regular_zeros(&sys)?.first() {
                Some(z) => (z.point[..k].to_vec(), z.point[k..].to_vec()),
                None => (sys.region().project(0..k).at(&vec![0.5; k]), y_mid),
            },
        };
        check_len("p0", &p, k)?;
        let q = inv.list("q0")?.unwrap_or(q);
        check_len("q0", &q, s)?;
        let bp = shoot(&sys, inv.lambda(), &p, &q)?;
        let table = Table::trajectory(&bp.orbit);
        Ok(Outcome::ok(json!({
            "solution": bp,
            "max_constraint_drift": bp.orbit.max_constraint_drift,
        }))?
        .with_table(table))
    }
}

pub struct BranchCmd;

impl Command for BranchCmd {
    fn name(&self) -> &'static str {
        "branch"
    }

    fn about(&self) -> &'static str {
        "continue periodic solutions in λ from a non-resonant zero"
    }

    fn extra_args(&self) -> Vec<Arg> {
        vec![list_arg("p0", "start from the zero of F nearest to this x")]
    }

    fn run(&self, inv: &Invocation) -> Result<Outcome> {
        let sys = inv.system()?;
        let zeros = regular_zeros(&sys)?;
        let origin = match inv.list("p0")? {
            Some(p) => {
                check_len("p0", &p, sys.k())?;
                let d = |z: &ZeroRecord| z.point.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
                zeros.iter().min_by(|a, b| d(a).total_cmp(&d(b)))
            }
            None => zeros
                .iter()
                .find(|z| classify_resonance(&sys, z).is_ok_and(|v| v.verdict == Resonance::NonResonant)),
        };
        let Some(origin) = origin else {
            bail!("no regular non-resonant zero of F in the box to start from");
        };
        let defaults = ContinuationOptions::default();
        let opts = ContinuationOptions {
            lambda_max: inv.flags.lambda_max.unwrap_or(defaults.lambda_max),
            norm_bound: inv.flags.norm_bound.unwrap_or(defaults.norm_bound),
            ..defaults
        };
        let branch = continue_branch(&sys, origin, &opts)?;
        let table = Table::branch(&branch);
        Ok(Outcome::ok(json!({ "options": opts, "branch": branch }))?.with_table(table))
    }
}

pub struct Multiplicity;

impl Command for Multiplicity {
    fn name(&self) -> &'static str {
        "multiplicity"
    }

    fn about(&self) -> &'static str {
        "count distinct T-periodic solutions at fixed λ by multistart shooting"
    }

    fn run(&self, inv: &Invocation) -> Result<Outcome> {
        let sys = inv.system()?;
        sys.validate(sys.tol.samples)?;
        let lambda = inv.lambda();
        let orbits = multiplicity_scan(&sys, lambda, sys.tol.grid)?;
        Outcome::ok(json!({
            "lambda": lambda,
            "grid": sys.tol.grid,
            "count": orbits.len(),
            "orbits": orbits,
        }))
    }
}

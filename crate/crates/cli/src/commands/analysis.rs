use anyhow::Result;
use clap::Arg;
use semidae::degree::{deg_psi, find_zeros, DegreeMethods};
use semidae::periodic::classify_resonance;
use semidae::Error;
use serde_json::json;

use super::{Command, Invocation, Outcome};

pub struct Check;

impl Command for Check {
    fn name(&self) -> &'static str {
        "check"
    }

    fn about(&self) -> &'static str {
        "parse the system and verify that d2g is invertible on the box"
    }

    fn run(&self, inv: &Invocation) -> Result<Outcome> {
        let sys = inv.system()?;
        match sys.validate(sys.tol.samples) {
            Ok(rep) => Outcome::ok(json!({ "valid": true, "validation": rep })),
            Err(e) if e.is_hypothesis_violation() => {
                eprintln!("error: {e}");
                let (witness, det) = match &e {
                    Error::HypothesisViolation { witness, det, .. } => (witness.clone(), Some(*det)),
                    Error::SingularBlock { point } => (point.clone(), None),
                    _ => unreachable!("is_hypothesis_violation"),
                };
                Ok(Outcome {
                    report: json!({
                        "valid": false,
                        "witness": witness,
                        "det": det,
                        "error": e.to_string(),
                    }),
                    table: None,
                    exit: 2,
                })
            }
            Err(e) => Err(e.into()),
        }
    }
}

pub struct Zeros;

impl Command for Zeros {
    fn name(&self) -> &'static str {
        "zeros"
    }

    fn about(&self) -> &'static str {
        "locate the zeros of F(x, y) = (f, g) in the box"
    }

    fn run(&self, inv: &Invocation) -> Result<Outcome> {
        let sys = inv.system()?;
        sys.validate(sys.tol.samples)?;
        Outcome::ok(find_zeros(&sys, sys.region(), sys.tol.grid)?)
    }
}

pub struct Degree;

impl Command for Degree {
    fn name(&self) -> &'static str {
        "degree"
    }

    fn about(&self) -> &'static str {
        "degree of F and of the tangent field on the constraint manifold"
    }

    fn extra_args(&self) -> Vec<Arg> {
        let methods = DegreeMethods::default();
        let help = format!("degree strategy: {}", methods.names().join(", "));
        vec![Arg::new("method").long("method").default_value("auto").help(help)]
    }

    fn run(&self, inv: &Invocation) -> Result<Outcome> {
        let sys = inv.system()?;
        let methods = DegreeMethods::default();
        let name: &String = inv.matches.get_one("method").expect("has default");
        let method = methods.get(name)?;
        Outcome::ok(deg_psi(&sys, method, &inv.degree_options(&sys))?)
    }
}

pub struct ResonanceCmd;

impl Command for ResonanceCmd {
    fn name(&self) -> &'static str {
        "resonance"
    }

    fn about(&self) -> &'static str {
        "classify every zero of F as T-resonant or not"
    }

    fn run(&self, inv: &Invocation) -> Result<Outcome> {
        let sys = inv.system()?;
        sys.validate(sys.tol.samples)?;
        let zeros = find_zeros(&sys, sys.region(), sys.tol.grid)?;
        let verdicts = zeros
            .zeros
            .iter()
            .map(|z| classify_resonance(&sys, z))
            .collect::<semidae::Result<Vec<_>>>()?;
        Outcome::ok(json!({ "period": sys.period(), "zeros": verdicts }))
    }
}

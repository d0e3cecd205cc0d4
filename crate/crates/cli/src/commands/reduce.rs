use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{value_parser, Arg};
use semidae::degree::{Auto, DegreeOptions};
use semidae::periodic::{reduce_hessenberg, reduce_implicit, HessenbergProblem};
use serde_json::json;

use super::{Command, Invocation, Outcome};
use crate::output::write_text;
use crate::sysfile::{read, region, strs, HessenbergFile, ImplicitFile, SystemFile};

fn emit_arg() -> Arg {
    Arg::new("emit")
        .long("emit")
        .value_parser(value_parser!(PathBuf))
        .help("also write the reduced system file here")
}

fn finish(inv: &Invocation, file: SystemFile, extra: serde_json::Value) -> Result<Outcome> {
    if let Some(path) = inv.matches.get_one::<PathBuf>("emit") {
        write_text(&toml::to_string(&file)?, path)?;
    }
    let mut report = json!({ "system": file });
    if let (Some(obj), serde_json::Value::Object(more)) = (report.as_object_mut(), extra) {
        obj.extend(more);
    }
    Outcome::ok(report)
}

pub struct Hessenberg;

impl Command for Hessenberg {
    fn name(&self) -> &'static str {
        "reduce-hessenberg"
    }

    fn about(&self) -> &'static str {
        "turn x' = f(x, y), gamma(x) = 0 into an index-1 system"
    }

    fn extra_args(&self) -> Vec<Arg> {
        vec![emit_arg()]
    }

    fn run(&self, inv: &Invocation) -> Result<Outcome> {
        let file: HessenbergFile = read(inv.path)?;
        let (f, gamma, h) = (strs(&file.f), strs(&file.gamma), strs(&file.h));
        let problem = HessenbergProblem {
            k: file.dim_x,
            s: file.dim_y,
            f: &f,
            gamma: &gamma,
            h: &h,
            period: file.period.value()?,
            region: region(&file.bounds, file.dim_x + file.dim_y)?,
        };
        let samples = inv.flags.samples.unwrap_or(semidae::Tolerances::default().samples);
        let sys = reduce_hessenberg(&problem, samples).with_context(|| format!("reducing {}", inv.path.display()))?;
        finish(inv, SystemFile::from_system(&sys), json!({}))
    }
}

pub struct Implicit;

impl Command for Implicit {
    fn name(&self) -> &'static str {
        "reduce-implicit"
    }

    fn about(&self) -> &'static str {
        "turn phi(x, x' + λh) = 0 into a semi-explicit system and report its degree"
    }

    fn extra_args(&self) -> Vec<Arg> {
        vec![emit_arg()]
    }

    fn run(&self, inv: &Invocation) -> Result<Outcome> {
        let file: ImplicitFile = read(inv.path)?;
        let defaults = DegreeOptions::default();
        let opts = DegreeOptions {
            grid: inv.flags.grid.unwrap_or(defaults.grid),
            samples: inv.flags.samples.unwrap_or(defaults.samples),
            seed: inv.flags.seed,
            ..defaults
        };
        let red = reduce_implicit(
            &strs(&file.phi),
            &strs(&file.h),
            file.period.value()?,
            region(&file.bounds, 2 * file.dim_x)?,
            &Auto,
            &opts,
        )
        .with_context(|| format!("reducing {}", inv.path.display()))?;
        finish(
            inv,
            SystemFile::from_system(&red.system),
            json!({ "degree": red.degree }),
        )
    }
}

//! Subcommands as trait objects in a name-keyed registry.

mod analysis;
mod periodic;
mod reduce;

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::{value_parser, Arg, ArgAction, ArgMatches};
use semidae::SystemDef;

use crate::output::Table;
use crate::sysfile::SystemFile;

/// Result of a command: a JSON report, optional plot data and the exit code.
pub struct Outcome {
    pub report: serde_json::Value,
    pub table: Option<Table>,
    pub exit: u8,
}

impl Outcome {
    pub fn ok(report: impl serde::Serialize) -> Result<Self> {
        Ok(Self {
            report: serde_json::to_value(report)?,
            table: None,
            exit: 0,
        })
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub lambda: Option<f64>,
    pub lambda_max: Option<f64>,
    pub norm_bound: Option<f64>,
    pub grid: Option<usize>,
    pub steps: Option<usize>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Flags {
    pub fn args() -> Vec<Arg> {
        let num = |name: &'static str, help: &'static str| {
            Arg::new(name).long(name).value_parser(value_parser!(f64)).help(help)
        };
        let count = |name: &'static str, help: &'static str| {
            Arg::new(name).long(name).value_parser(value_parser!(usize)).help(help)
        };
        let path = |name: &'static str, help: &'static str| {
            Arg::new(name)
                .long(name)
                .value_parser(value_parser!(PathBuf))
                .help(help)
        };
        vec![
            Arg::new("system")
                .required(true)
                .value_parser(value_parser!(PathBuf))
                .help("input file"),
            num("lambda", "forcing amplitude"),
            num("lambda-max", "continuation stops at this λ"),
            num("norm-bound", "continuation stops past this orbit sup-norm"),
            count("grid", "multistart points per dimension"),
            count("steps", "integration steps per period"),
            count("samples", "samples for the d2g check"),
            Arg::new("seed")
                .long("seed")
                .value_parser(value_parser!(u64))
                .default_value("0")
                .help("seed for randomized perturbation votes"),
            path("out", "write the JSON report here instead of stdout"),
            path("csv", "write plot data here"),
        ]
    }

    pub fn from_matches(m: &ArgMatches) -> Self {
        Self {
            lambda: m.get_one("lambda").copied(),
            lambda_max: m.get_one("lambda-max").copied(),
            norm_bound: m.get_one("norm-bound").copied(),
            grid: m.get_one("grid").copied(),
            steps: m.get_one("steps").copied(),
            samples: m.get_one("samples").copied(),
            seed: m.get_one("seed").copied().unwrap_or(0),
            out: m.get_one("out").cloned(),
            csv: m.get_one("csv").cloned(),
        }
    }
}

pub struct Invocation<'a> {
    pub path: &'a Path,
    pub flags: Flags,
    pub matches: &'a ArgMatches,
}

impl Invocation<'_> {
    /// Load the system file and apply command-line overrides.
    pub fn system(&self) -> Result<SystemDef> {
        let mut sys = SystemFile::load(self.path)?;
        if let Some(steps) = self.flags.steps {
            sys.tol.steps = steps;
        }
        if let Some(grid) = self.flags.grid {
            sys.tol.grid = grid;
        }
        if let Some(samples) = self.flags.samples {
            sys.tol.samples = samples;
        }
        Ok(sys)
    }

    pub fn degree_options(&self, sys: &SystemDef) -> semidae::degree::DegreeOptions {
        semidae::degree::DegreeOptions {
            grid: sys.tol.grid,
            seed: self.flags.seed,
            samples: sys.tol.samples,
            ..Default::default()
        }
    }

    pub fn lambda(&self) -> f64 {
        self.flags.lambda.unwrap_or(0.0)
    }

    /// Comma-separated list flag declared with [`list_arg`].
    pub fn list(&self, name: &str) -> Result<Option<Vec<f64>>> {
        let Some(src) = self.matches.get_one::<String>(name) else {
            return Ok(None);
        };
        let vals: Result<Vec<f64>, _> = src.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match vals {
            Ok(v) => Ok(Some(v)),
            Err(e) => bail!("--{name} '{src}': {e}"),
        }
    }
}

pub fn list_arg(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name)
        .long(name)
        .value_name("A,B,..")
        .action(ArgAction::Set)
        .help(help)
}

pub trait Command: Send + Sync {
    fn name(&self) -> &'static str;

    fn about(&self) -> &'static str;

    /// Flags beyond the shared set.
    fn extra_args(&self) -> Vec<Arg> {
        Vec::new()
    }

    fn run(&self, inv: &Invocation) -> Result<Outcome>;
}

pub struct Commands {
    entries: Vec<Box<dyn Command>>,
}

impl Default for Commands {
    fn default() -> Self {
        let mut reg = Self { entries: Vec::new() };
        reg.register(Box::new(analysis::Check));
        reg.register(Box::new(analysis::Zeros));
        reg.register(Box::new(analysis::Degree));
        reg.register(Box::new(analysis::ResonanceCmd));
        reg.register(Box::new(periodic::Shoot));
        reg.register(Box::new(periodic::BranchCmd));
        reg.register(Box::new(periodic::Multiplicity));
        reg.register(Box::new(reduce::Hessenberg));
        reg.register(Box::new(reduce::Implicit));
        reg
    }
}

impl Commands {
    /// Adds a command, replacing any with the same name.
    pub fn register(&mut self, cmd: Box<dyn Command>) {
        self.entries.retain(|c| c.name() != cmd.name());
        self.entries.push(cmd);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Command> {
        self.entries.iter().find(|c| c.name() == name).map(|c| c.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Command> {
        self.entries.iter().map(|c| c.as_ref())
    }

    pub fn cli(&self) -> clap::Command {
        let subs = self.iter().map(|c| {
            clap::Command::new(c.name())
                .about(c.about())
                .args(Flags::args())
                .args(c.extra_args())
        });
        clap::Command::new("semidae")
            .about("Degree and periodic solutions of semi-explicit DAEs")
            .version(env!("CARGO_PKG_VERSION"))
            .subcommand_required(true)
            .subcommands(subs)
    }
}

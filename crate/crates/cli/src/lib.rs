//! Command-line front end: system files, subcommands and report output.

pub mod commands;
pub mod output;
pub mod sysfile;

use std::path::PathBuf;

use anyhow::Result;
use commands::{Commands, Flags, Invocation};

/// 2 for a violated d2g hypothesis, 1 for anything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let violation = err
        .chain()
        .filter_map(|e| e.downcast_ref::<semidae::Error>())
        .any(semidae::Error::is_hypothesis_violation);
    if violation {
        2
    } else {
        1
    }
}

/// Dispatch parsed arguments to the registered command and emit its output.
pub fn run(registry: &Commands, matches: &clap::ArgMatches) -> Result<u8> {
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let cmd = registry.get(name).expect("clap only accepts registered names");
    let path: &PathBuf = sub.get_one("system").expect("required");
    let inv = Invocation {
        path,
        flags: Flags::from_matches(sub),
        matches: sub,
    };
    let outcome = cmd.run(&inv)?;
    if let (Some(table), Some(csv)) = (&outcome.table, &inv.flags.csv) {
        table.write(csv)?;
    }
    output::write_report(&outcome.report, inv.flags.out.as_deref())?;
    Ok(outcome.exit)
}

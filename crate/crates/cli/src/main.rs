use std::process::ExitCode;

use semidae_cli::commands::Commands;

fn main() -> ExitCode {
    let registry = Commands::default();
    let matches = match registry.cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match semidae_cli::run(&registry, &matches) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(semidae_cli::exit_code(&e))
        }
    }
}

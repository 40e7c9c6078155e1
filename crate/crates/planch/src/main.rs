use std::io::Write;
use std::process;

use clap::Parser;
use planch::commands::{run, Cli, ExitCode};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::InputError as i32 } else { 0 };
            let _ = e.print();
            process::exit(code);
        }
    };
    let (report, code) = match run(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("planch: {e}");
            process::exit(e.exit_code() as i32);
        }
    };
    let text = report.render(cli.format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("planch: cannot write {}: {e}", path.display());
                process::exit(ExitCode::InputError as i32);
            }
        }
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    process::exit(code as i32);
}

use std::process::ExitCode;

use clap::Parser;
use dcq_cli::{execute, resolve, Cli, OUT_DIR_ENV};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let env_out = std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(Into::into);
    let result = resolve(cli, env_out).and_then(|cfg| execute(&cfg, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dcq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

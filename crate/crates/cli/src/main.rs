use std::io;
use std::process::ExitCode;

use field_slln_cli::{config::SEED_ENV, run, Env};

fn main() -> ExitCode {
    let env = Env {
        seed: std::env::var(SEED_ENV).ok(),
    };
    let code = run(std::env::args_os(), &env, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}

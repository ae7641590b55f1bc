use std::io::Write;

use rho_calc::cli::{run, TOLERANCE_ENV};

fn main() {
    let out = run(std::env::args_os(), std::env::var(TOLERANCE_ENV).ok());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}

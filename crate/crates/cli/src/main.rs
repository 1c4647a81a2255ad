use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let tol = std::env::var(chiralkit_cli::TOL_ENV).ok();
    let out = chiralkit_cli::run(std::env::args_os(), tol.as_deref());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(out.code as u8)
}

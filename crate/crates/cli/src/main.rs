use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let r = cir_sldp_cli::run(std::env::args_os());
    // a closed pipe is not an error worth reporting
    let _ = std::io::stdout().lock().write_all(&r.stdout);
    eprint!("{}", r.stderr);
    ExitCode::from(r.code)
}

use std::process::ExitCode;

fn main() -> ExitCode {
    let code = oppenheim_trim::cli::main(std::env::args_os());
    ExitCode::from(code)
}

use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(epicast::cli::run(std::env::args_os()))
}

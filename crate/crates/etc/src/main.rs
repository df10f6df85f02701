use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(etc::cli::main_with(std::env::args_os()))
}

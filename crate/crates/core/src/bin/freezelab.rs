use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(freezelab::cli::run(std::env::args_os()) as u8)
}

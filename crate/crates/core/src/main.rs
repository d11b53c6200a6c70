use std::process::ExitCode;

fn main() -> ExitCode {
    corrsurf::cli::run_from(std::env::args_os())
}

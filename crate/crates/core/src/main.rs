use std::process::ExitCode;

fn main() -> ExitCode {
    evifuse::cli::run()
}

use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(pyamabe::cli::main_from_env())
}

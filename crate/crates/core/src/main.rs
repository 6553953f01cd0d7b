use std::process::ExitCode;

fn main() -> ExitCode {
    boldwalk::cli::main()
}

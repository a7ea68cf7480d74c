use std::process::ExitCode;

fn main() -> ExitCode {
    walkembed::cli::main()
}

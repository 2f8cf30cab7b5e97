fn main() -> std::process::ExitCode {
    vcapprox::cli::main_with(std::env::args_os())
}

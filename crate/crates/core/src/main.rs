fn main() -> std::process::ExitCode {
    nambu::cli::main()
}

fn main() -> std::process::ExitCode {
    ecdescent::cli::main()
}

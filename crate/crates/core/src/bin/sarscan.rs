fn main() -> std::process::ExitCode {
    sarscan::cli::run()
}

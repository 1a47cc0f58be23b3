fn main() {
    std::process::exit(strokebench::cli::run_command(std::env::args_os()));
}

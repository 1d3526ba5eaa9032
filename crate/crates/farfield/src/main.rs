fn main() {
    std::process::exit(farfield::cli::run_command(std::env::args_os()));
}

fn main() {
    std::process::exit(phvfe::cli::run_cli(std::env::args_os()));
}

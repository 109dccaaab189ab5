fn main() {
    std::process::exit(loghls::cli::run_cli(std::env::args_os()));
}

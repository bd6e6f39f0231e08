fn main() {
    std::process::exit(entdyn::cli::run_cli(std::env::args_os()));
}

fn main() {
    std::process::exit(fnls_cli::run_cli(std::env::args_os()));
}

fn main() {
    std::process::exit(diter_cli::run_cli(std::env::args_os()));
}

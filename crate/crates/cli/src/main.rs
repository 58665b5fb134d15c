fn main() {
    std::process::exit(tautsys_cli::run(std::env::args_os()));
}

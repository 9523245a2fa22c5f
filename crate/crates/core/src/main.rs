fn main() {
    std::process::exit(ribbonband::cli::run(std::env::args_os()));
}

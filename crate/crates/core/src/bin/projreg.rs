fn main() {
    std::process::exit(projreg::cli::run(std::env::args_os()));
}

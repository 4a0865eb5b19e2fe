fn main() {
    std::process::exit(coopsim::cli::run(std::env::args()));
}

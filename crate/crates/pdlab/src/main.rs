fn main() {
    std::process::exit(pdlab::cli::run(std::env::args()));
}

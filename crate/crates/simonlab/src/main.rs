fn main() {
    std::process::exit(simonlab::cli::run());
}

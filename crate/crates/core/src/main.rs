fn main() {
    std::process::exit(nct::cli::run());
}

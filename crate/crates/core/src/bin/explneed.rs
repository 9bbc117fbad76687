fn main() {
    std::process::exit(explneed::cli::run());
}

fn main() {
    std::process::exit(bowforge::cli::run());
}

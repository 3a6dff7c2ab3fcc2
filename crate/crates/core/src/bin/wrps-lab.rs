fn main() {
    std::process::exit(wrps::cli::run());
}

fn main() {
    std::process::exit(provsketch::cli::run());
}

fn main() {
    std::process::exit(chaotic_ac::cli::main());
}

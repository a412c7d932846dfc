fn main() {
    std::process::exit(vtol::cli::main());
}

fn main() {
    std::process::exit(syklab::cli::main());
}

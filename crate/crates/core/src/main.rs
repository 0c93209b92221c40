fn main() {
    std::process::exit(hiaer_core::cli::main());
}

fn main() {
    std::process::exit(pfc_sync::cli::main());
}

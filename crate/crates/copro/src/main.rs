fn main() {
    std::process::exit(copro::cli_main());
}

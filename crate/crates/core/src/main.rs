fn main() {
    std::process::exit(axibouss::cli::run_cli());
}

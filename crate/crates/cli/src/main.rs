fn main() {
    std::process::exit(fraclat_cli::run(std::env::args_os()));
}

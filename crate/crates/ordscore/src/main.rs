fn main() {
    std::process::exit(ordscore::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(qsa::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(pdmarket::cli::run(std::env::args_os()));
}

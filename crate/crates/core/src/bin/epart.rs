fn main() {
    std::process::exit(epart::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(harness::cli::run(std::env::args_os()));
}

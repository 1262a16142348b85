fn main() {
    std::process::exit(magnav::cli::run(std::env::args_os()));
}

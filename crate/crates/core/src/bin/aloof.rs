fn main() {
    std::process::exit(aloof::cli::run(std::env::args_os()));
}

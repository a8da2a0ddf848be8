fn main() {
    std::process::exit(nptmark::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(ncsos::cli::run(std::env::args_os()));
}

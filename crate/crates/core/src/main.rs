fn main() {
    std::process::exit(aqec::cli::run(std::env::args_os()));
}

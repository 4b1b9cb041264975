fn main() {
    std::process::exit(viscodual::cli::run(std::env::args_os()));
}

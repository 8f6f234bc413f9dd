fn main() {
    std::process::exit(covreg::cli::run(std::env::args_os()));
}

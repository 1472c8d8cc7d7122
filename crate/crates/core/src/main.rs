fn main() {
    std::process::exit(kumsim::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(csep::cli::main_with_args(std::env::args_os()));
}

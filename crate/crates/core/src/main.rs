fn main() {
    std::process::exit(galmod::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(drna::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(stochar::cli::main_with_args(std::env::args_os()));
}

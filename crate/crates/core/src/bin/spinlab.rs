fn main() {
    std::process::exit(spinlab::cli::main_with_args(std::env::args_os()));
}

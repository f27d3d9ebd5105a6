fn main() {
    std::process::exit(curvforge::cli::main_with_args(std::env::args_os()));
}

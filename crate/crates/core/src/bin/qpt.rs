fn main() {
    std::process::exit(quasipoly::cli::main_with_args(std::env::args_os()));
}

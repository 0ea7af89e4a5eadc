fn main() {
    std::process::exit(etlab_cli::main_with_args(std::env::args_os()));
}

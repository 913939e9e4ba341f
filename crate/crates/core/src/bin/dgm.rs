fn main() {
    std::process::exit(dgm_core::cli::main_with_args(std::env::args_os()));
}

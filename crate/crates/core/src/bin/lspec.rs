fn main() {
    std::process::exit(jetspectra::cli::main_with_args(std::env::args_os()));
}

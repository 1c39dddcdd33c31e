fn main() {
    std::process::exit(pathsplit::cli::main_with(std::env::args_os()));
}

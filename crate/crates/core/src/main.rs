fn main() {
    std::process::exit(cplus::cli::main_with_args(std::env::args_os()));
}

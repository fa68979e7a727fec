fn main() {
    std::process::exit(hmix::cli::main_with_args(std::env::args_os()));
}

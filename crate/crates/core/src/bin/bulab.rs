fn main() {
    std::process::exit(bulab::cli::main_from(std::env::args_os()));
}

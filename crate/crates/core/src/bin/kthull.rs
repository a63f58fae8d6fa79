fn main() {
    std::process::exit(kthull::cli::main_with(std::env::args_os()));
}

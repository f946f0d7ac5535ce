fn main() {
    std::process::exit(levyfac::cli::main_with(std::env::args_os()));
}

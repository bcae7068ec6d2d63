fn main() {
    std::process::exit(hvtorus::cli::main_with(std::env::args_os()));
}

fn main() {
    std::process::exit(pseudohopf::cli::main_with(std::env::args_os()));
}

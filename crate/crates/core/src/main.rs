fn main() {
    std::process::exit(uhs_core::cli::run(std::env::args_os()));
}

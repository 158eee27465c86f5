fn main() {
    std::process::exit(bmforge::cli::run(std::env::args_os()));
}

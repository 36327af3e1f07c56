fn main() {
    std::process::exit(globlin::cli::run(std::env::args_os()));
}

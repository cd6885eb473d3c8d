fn main() {
    std::process::exit(prefnet::cli::run(std::env::args_os()));
}

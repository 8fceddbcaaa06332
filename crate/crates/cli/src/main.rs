fn main() {
    std::process::exit(conley_cli::run(std::env::args_os()));
}

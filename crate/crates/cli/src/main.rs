fn main() {
    std::process::exit(jba_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(auditml_cli::run(std::env::args_os()));
}

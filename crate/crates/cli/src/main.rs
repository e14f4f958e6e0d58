fn main() {
    std::process::exit(fracsnap_cli::run(std::env::args_os()));
}

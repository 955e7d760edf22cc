fn main() {
    std::process::exit(rfcs_cli::run(std::env::args_os()));
}

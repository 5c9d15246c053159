fn main() {
    std::process::exit(u2metric_cli::run(std::env::args_os()));
}

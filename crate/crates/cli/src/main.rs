fn main() {
    std::process::exit(gauge_lab_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(srivc::cli::run(std::env::args_os()));
}

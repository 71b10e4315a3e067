fn main() {
    std::process::exit(cvconc::cli::run(std::env::args_os()));
}

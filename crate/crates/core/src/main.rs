fn main() {
    std::process::exit(holocurves::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(fracstep::cli::run(std::env::args_os()));
}

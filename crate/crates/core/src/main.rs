fn main() {
    std::process::exit(qorient::cli::run(std::env::args_os()));
}

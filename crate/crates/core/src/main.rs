fn main() {
    std::process::exit(resaware::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(ladder_forge::cli::run(std::env::args_os()));
}

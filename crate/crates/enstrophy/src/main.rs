fn main() {
    std::process::exit(enstrophy::cli::run(std::env::args_os()));
}

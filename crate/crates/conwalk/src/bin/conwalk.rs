fn main() {
    std::process::exit(conwalk::cli::run(std::env::args_os()));
}

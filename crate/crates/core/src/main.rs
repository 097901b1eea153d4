fn main() {
    std::process::exit(revgreedy::cli::run(std::env::args_os()));
}

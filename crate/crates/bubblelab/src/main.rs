fn main() {
    std::process::exit(bubblelab::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(lrboost::cli::run(std::env::args_os()));
}

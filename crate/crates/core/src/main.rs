fn main() {
    std::process::exit(ratiolim::cli::run(std::env::args_os()));
}

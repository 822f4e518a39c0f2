fn main() {
    std::process::exit(picplace::cli::run(std::env::args()));
}

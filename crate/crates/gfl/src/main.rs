fn main() {
    std::process::exit(gfl::cli::run(std::env::args()));
}

fn main() {
    std::process::exit(sqcycle::cli::run_command(std::env::args()));
}

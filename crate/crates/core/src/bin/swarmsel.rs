fn main() {
    std::process::exit(swarmsel::cli::run_from(std::env::args_os()));
}

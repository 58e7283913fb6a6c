fn main() {
    std::process::exit(resonance::cli::run(std::env::args_os()));
}

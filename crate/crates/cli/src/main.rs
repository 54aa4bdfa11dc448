fn main() {
    std::process::exit(wittmod_cli::run_command(std::env::args_os()));
}

fn main() {
    std::process::exit(forkrace_cli::run(std::env::args_os()));
}

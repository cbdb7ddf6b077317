fn main() {
    std::process::exit(framelab_cli::run(std::env::args_os()));
}

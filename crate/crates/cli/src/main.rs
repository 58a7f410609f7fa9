fn main() {
    std::process::exit(delta_closure_cli::run(std::env::args_os()));
}

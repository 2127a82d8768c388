fn main() {
    if let Err(e) = spinforge_cli::init_threads() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
    std::process::exit(spinforge_cli::main_with_args(std::env::args_os()));
}

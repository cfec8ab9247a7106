fn main() {
    std::process::exit(itelos_cli::main_exit_code());
}

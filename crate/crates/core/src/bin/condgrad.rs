fn main() {
    std::process::exit(condgrad::cli::main_from_env());
}

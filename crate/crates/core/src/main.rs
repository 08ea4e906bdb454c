fn main() {
    let code = gqwell::cli::run(std::env::args_os());
    std::process::exit(code);
}

fn main() {
    let code = oconv::cli::cli_main(std::env::args_os());
    std::process::exit(code);
}

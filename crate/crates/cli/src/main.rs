fn main() {
    std::process::exit(irrinv_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(flipcpw::cli::run(std::env::args_os()));
}

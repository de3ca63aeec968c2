fn main() {
    std::process::exit(forced_ep::cli::parse_and_dispatch(std::env::args_os()));
}

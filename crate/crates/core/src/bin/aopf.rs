fn main() {
    std::process::exit(aopf::cli::run_cli(std::env::args_os()));
}

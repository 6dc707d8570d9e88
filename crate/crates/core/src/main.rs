fn main() {
    std::process::exit(curtangent_core::cli::cli_main(std::env::args_os()));
}

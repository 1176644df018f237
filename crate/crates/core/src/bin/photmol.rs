fn main() {
    std::process::exit(photmol::cli::cli_main(std::env::args_os()));
}

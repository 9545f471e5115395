fn main() {
    std::process::exit(slater_zeta_cli::run(std::env::args_os()));
}

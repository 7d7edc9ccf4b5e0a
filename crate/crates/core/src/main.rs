fn main() {
    std::process::exit(qrpca::cli::run(std::env::args_os()));
}

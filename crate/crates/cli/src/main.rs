fn main() {
    std::process::exit(spectra_cert_cli::run(std::env::args_os()));
}

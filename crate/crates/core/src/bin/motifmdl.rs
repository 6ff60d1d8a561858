fn main() {
    std::process::exit(motifmdl::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(seqtest::cli::run(std::env::args_os()));
}

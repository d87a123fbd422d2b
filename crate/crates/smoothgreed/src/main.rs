fn main() {
    std::process::exit(smoothgreed::cli::main_from(std::env::args_os()));
}

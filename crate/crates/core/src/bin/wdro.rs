fn main() {
    std::process::exit(wdro::cli::run(std::env::args_os()));
}

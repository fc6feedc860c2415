fn main() {
    std::process::exit(hnerv::cli::run(std::env::args_os()));
}

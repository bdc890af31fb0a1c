fn main() {
    std::process::exit(relhyp::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(planar_pendulum::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(uavlora::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(rwos::cli::run());
}

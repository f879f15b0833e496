fn main() {
    std::process::exit(orbit_ricci::cli::run(std::env::args_os()))
}

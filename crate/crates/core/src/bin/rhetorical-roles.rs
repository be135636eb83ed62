fn main() {
    std::process::exit(rhetorical_roles::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(crdlab_cli::run(std::env::args_os()));
}

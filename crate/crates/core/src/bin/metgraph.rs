fn main() {
    std::process::exit(metgraph::cli::run(std::env::args_os()));
}

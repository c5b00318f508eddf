fn main() {
    std::process::exit(fisher_scale::cli::run(std::env::args_os()));
}

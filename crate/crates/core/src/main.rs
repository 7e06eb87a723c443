fn main() {
    std::process::exit(greedy_voting::cli::main_with_args(std::env::args_os()));
}

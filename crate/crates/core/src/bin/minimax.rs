fn main() {
    std::process::exit(minimax_dual::cli::run(std::env::args_os()));
}

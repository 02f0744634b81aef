fn main() {
    std::process::exit(rademacher_tails::cli::main_exit_code());
}
